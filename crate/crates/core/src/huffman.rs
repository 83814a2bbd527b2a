//! Canonical Huffman coding over `u32` symbols.
//!
//! Codes are assigned canonically by `(length, symbol)`, so a codebook is
//! fully described by its symbol → length map. Bits are written MSB-first:
//! bit offset 0 is the most significant bit of octet 0.
//!
//! A single-symbol alphabet gets a 1-bit code so every symbol advances the
//! stream.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::wire::{self, Reader};

/// Longest code the decoder can peek in one 64-bit window.
pub const MAX_CODE_LEN: u8 = 57;
const FAST_BITS: u8 = 10;

/// A code boundary inside a bit stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitPos {
    pub byte: u64,
    /// 0..8, counted from the most significant bit.
    pub bit: u8,
}

impl BitPos {
    pub fn from_offset(offset: u64) -> Self {
        BitPos {
            byte: offset / 8,
            bit: (offset % 8) as u8,
        }
    }

    pub fn offset(self) -> u64 {
        self.byte * 8 + self.bit as u64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    bit_len: u64,
}

impl BitStream {
    pub fn from_parts(bytes: Vec<u8>, bit_len: u64) -> Result<Self> {
        if bit_len.div_ceil(8) != bytes.len() as u64 {
            return Err(Error::Format(format!(
                "{bit_len} bits cannot occupy {} octets",
                bytes.len()
            )));
        }
        Ok(BitStream { bytes, bit_len })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    /// Bit length word plus the raw octets.
    pub fn serialized_size(&self) -> u64 {
        8 + self.bytes.len() as u64
    }

    pub(crate) fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u64(out, self.bit_len);
        out.extend_from_slice(&self.bytes);
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let bit_len = r.u64()?;
        let n = usize::try_from(bit_len.div_ceil(8))
            .map_err(|_| Error::Format("stream too long".into()))?;
        Self::from_parts(r.bytes(n)?.to_vec(), bit_len)
    }

    /// Up to 57 bits starting at `offset`, MSB-aligned into the low `k` bits;
    /// bits past the end of the buffer read as zero.
    #[inline]
    fn peek(&self, offset: u64, k: u8) -> u64 {
        let at = (offset / 8) as usize;
        let mut raw = [0u8; 8];
        if at + 8 <= self.bytes.len() {
            raw.copy_from_slice(&self.bytes[at..at + 8]);
        } else if at < self.bytes.len() {
            let n = self.bytes.len() - at;
            raw[..n].copy_from_slice(&self.bytes[at..]);
        }
        (u64::from_be_bytes(raw) << (offset % 8)) >> (64 - k as u32)
    }
}

#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn position(&self) -> BitPos {
        BitPos::from_offset(self.bit_len)
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    /// Appends the low `len` bits of `code`, most significant first.
    pub fn push(&mut self, code: u64, len: u8) {
        let mut remaining = len;
        while remaining > 0 {
            let used = (self.bit_len % 8) as u8;
            if used == 0 {
                self.bytes.push(0);
            }
            let free = 8 - used;
            let take = free.min(remaining);
            let chunk = (code >> (remaining - take)) & ((1u64 << take) - 1);
            *self.bytes.last_mut().unwrap() |= (chunk as u8) << (free - take);
            remaining -= take;
            self.bit_len += take as u64;
        }
    }

    pub fn finish(self) -> BitStream {
        BitStream {
            bytes: self.bytes,
            bit_len: self.bit_len,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CodeBook {
    /// `(symbol, length)` sorted by `(length, symbol)`.
    ordered: Vec<(u32, u8)>,
    codes: HashMap<u32, (u64, u8)>,
    max_len: u8,
    first_code: Vec<u64>,
    first_index: Vec<usize>,
    count: Vec<usize>,
    /// Indexed by the next `fast_bits` bits: `(ordered index + 1) << 8 | length`,
    /// or 0 when the code is longer than `fast_bits`.
    fast: Vec<u32>,
    fast_bits: u8,
}

impl PartialEq for CodeBook {
    fn eq(&self, other: &Self) -> bool {
        self.ordered == other.ordered
    }
}

impl Eq for CodeBook {}

impl CodeBook {
    /// Optimal prefix code for the given symbol frequencies.
    ///
    /// Ties between equal weights are broken by the smallest symbol in each
    /// subtree, which makes the resulting lengths deterministic.
    pub fn from_frequencies(freqs: &BTreeMap<u32, u64>) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if let Some((&s, _)) = freqs.iter().find(|(_, &f)| f == 0) {
            return Err(Error::InvalidParameter(format!(
                "symbol {s} has zero frequency"
            )));
        }
        if freqs.len() == 1 {
            let (&s, _) = freqs.iter().next().unwrap();
            return Self::from_lengths(vec![(s, 1)]);
        }

        let leaves = freqs.len();
        let mut parent: Vec<usize> = vec![usize::MAX; leaves];
        let mut heap: BinaryHeap<Reverse<(u64, u32, usize)>> = freqs
            .iter()
            .enumerate()
            .map(|(i, (&s, &f))| Reverse((f, s, i)))
            .collect();
        while heap.len() > 1 {
            let Reverse((wa, sa, a)) = heap.pop().unwrap();
            let Reverse((wb, sb, b)) = heap.pop().unwrap();
            let node = parent.len();
            parent.push(usize::MAX);
            parent[a] = node;
            parent[b] = node;
            heap.push(Reverse((wa + wb, sa.min(sb), node)));
        }
        // Parents always have larger indices than their children.
        let mut depth = vec![0usize; parent.len()];
        for i in (0..parent.len() - 1).rev() {
            depth[i] = depth[parent[i]] + 1;
        }
        let pairs = freqs
            .keys()
            .zip(&depth[..leaves])
            .map(|(&s, &d)| {
                if d > MAX_CODE_LEN as usize {
                    Err(Error::CodeTooLong(d))
                } else {
                    Ok((s, d as u8))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_lengths(pairs)
    }

    /// Rebuilds the canonical code from symbol lengths.
    pub fn from_lengths(mut pairs: Vec<(u32, u8)>) -> Result<Self> {
        if pairs.is_empty() {
            return Ok(Self::empty());
        }
        pairs.sort_unstable_by_key(|&(s, l)| (l, s));
        let max_len = pairs.last().unwrap().1;
        if pairs[0].1 == 0 || max_len > MAX_CODE_LEN {
            return Err(Error::Format(format!(
                "code length out of range 1..={MAX_CODE_LEN}"
            )));
        }
        // Kraft sum scaled by 2^max_len.
        let mut kraft: u128 = 0;
        for &(_, l) in &pairs {
            kraft += 1u128 << (max_len - l);
        }
        if kraft > 1u128 << max_len {
            return Err(Error::Format(
                "code lengths violate the Kraft inequality".into(),
            ));
        }

        let n = max_len as usize + 1;
        let mut first_code = vec![0u64; n];
        let mut first_index = vec![0usize; n];
        let mut count = vec![0usize; n];
        let mut codes = HashMap::with_capacity(pairs.len());
        let mut code = 0u64;
        let mut prev_len = pairs[0].1;
        for (i, &(s, l)) in pairs.iter().enumerate() {
            code <<= l - prev_len;
            prev_len = l;
            if count[l as usize] == 0 {
                first_code[l as usize] = code;
                first_index[l as usize] = i;
            }
            count[l as usize] += 1;
            if codes.insert(s, (code, l)).is_some() {
                return Err(Error::Format(format!("symbol {s} listed twice")));
            }
            code += 1;
        }

        let fast_bits = max_len.min(FAST_BITS);
        let mut fast = vec![0u32; 1 << fast_bits];
        for (i, &(s, l)) in pairs.iter().enumerate() {
            if l > fast_bits {
                break;
            }
            let c = codes[&s].0;
            let span = fast_bits - l;
            let start = (c << span) as usize;
            for e in &mut fast[start..start + (1 << span)] {
                *e = ((i as u32 + 1) << 8) | l as u32;
            }
        }

        Ok(CodeBook {
            ordered: pairs,
            codes,
            max_len,
            first_code,
            first_index,
            count,
            fast,
            fast_bits,
        })
    }

    fn empty() -> Self {
        CodeBook {
            ordered: Vec::new(),
            codes: HashMap::new(),
            max_len: 0,
            first_code: vec![0],
            first_index: vec![0],
            count: vec![0],
            fast: vec![0],
            fast_bits: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered.is_empty()
    }

    /// `(symbol, length)` in canonical order.
    pub fn lengths(&self) -> &[(u32, u8)] {
        &self.ordered
    }

    pub fn code(&self, symbol: u32) -> Option<(u64, u8)> {
        self.codes.get(&symbol).copied()
    }

    pub fn max_len(&self) -> u8 {
        self.max_len
    }

    /// Symbol count word plus 5 octets per `(symbol, length)` entry.
    pub fn serialized_size(&self) -> u64 {
        4 + 5 * self.ordered.len() as u64
    }

    #[inline]
    pub fn encode_into(&self, symbol: u32, out: &mut BitWriter) -> Result<()> {
        let (code, len) = self.code(symbol).ok_or(Error::UnknownSymbol(symbol))?;
        out.push(code, len);
        Ok(())
    }

    /// Encodes `symbols` and returns the stream with the boundary after
    /// each symbol's code.
    pub fn encode_sequence(&self, symbols: &[u32]) -> Result<(BitStream, Vec<BitPos>)> {
        let mut w = BitWriter::new();
        let mut ends = Vec::with_capacity(symbols.len());
        for &s in symbols {
            self.encode_into(s, &mut w)?;
            ends.push(w.position());
        }
        Ok((w.finish(), ends))
    }

    /// A decoder whose first symbol is the code starting at `at`.
    pub fn decoder<'a>(&'a self, stream: &'a BitStream, at: BitPos) -> Result<Decoder<'a>> {
        if at.bit >= 8 || at.offset() > stream.bit_len() {
            return Err(Error::OutOfStream {
                position: at.offset(),
                len: stream.bit_len(),
            });
        }
        Ok(Decoder {
            book: self,
            stream,
            pos: at.offset(),
        })
    }

    pub(crate) fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u32(out, self.ordered.len() as u32);
        for &(s, l) in &self.ordered {
            wire::put_u32(out, s);
            wire::put_u8(out, l);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let n = r.u32()? as usize;
        let pairs = (0..n)
            .map(|_| Ok((r.u32()?, r.u8()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_lengths(pairs)
    }
}

/// Per-query decoding cursor.
#[derive(Clone, Debug)]
pub struct Decoder<'a> {
    book: &'a CodeBook,
    stream: &'a BitStream,
    pos: u64,
}

impl Decoder<'_> {
    pub fn position(&self) -> BitPos {
        BitPos::from_offset(self.pos)
    }

    /// The next symbol, `None` at the exact end of the stream, or a
    /// corruption error when the remaining bits match no code.
    #[inline]
    pub fn decode_next(&mut self) -> Result<Option<u32>> {
        let remaining = self.stream.bit_len - self.pos;
        if remaining == 0 {
            return Ok(None);
        }
        let book = self.book;
        if book.fast_bits > 0 {
            let e = book.fast[self.stream.peek(self.pos, book.fast_bits) as usize];
            if e != 0 {
                let len = (e & 0xff) as u64;
                if len > remaining {
                    return Err(Error::Corrupt(self.pos));
                }
                self.pos += len;
                return Ok(Some(book.ordered[(e >> 8) as usize - 1].0));
            }
        }
        let limit = (book.max_len as u64).min(remaining) as u8;
        if limit == 0 {
            return Err(Error::Corrupt(self.pos));
        }
        let window = self.stream.peek(self.pos, limit);
        for l in 1..=limit {
            let code = window >> (limit - l);
            let li = l as usize;
            if book.count[li] > 0 && code >= book.first_code[li] {
                let k = (code - book.first_code[li]) as usize;
                if k < book.count[li] {
                    self.pos += l as u64;
                    return Ok(Some(book.ordered[book.first_index[li] + k].0));
                }
            }
        }
        Err(Error::Corrupt(self.pos))
    }
}

impl Iterator for Decoder<'_> {
    type Item = Result<u32>;

    fn next(&mut self) -> Option<Self::Item> {
        self.decode_next().transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn freqs(pairs: &[(u32, u64)]) -> BTreeMap<u32, u64> {
        pairs.iter().copied().collect()
    }

    fn length_of(cb: &CodeBook, s: u32) -> u8 {
        cb.code(s).unwrap().1
    }

    /// Minimum Σ f·len over every length vector satisfying Kraft, i.e. over
    /// every prefix code on the alphabet.
    fn brute_force_cost(fs: &[u64]) -> u64 {
        if fs.len() == 1 {
            return fs[0];
        }
        let n = fs.len();
        let max = n as u32 - 1;
        let mut best = u64::MAX;
        let mut lens = vec![1u32; n];
        loop {
            let kraft: f64 = lens.iter().map(|&l| 0.5f64.powi(l as i32)).sum();
            if kraft <= 1.0 + 1e-12 {
                let cost = fs.iter().zip(&lens).map(|(&f, &l)| f * l as u64).sum();
                best = best.min(cost);
            }
            let mut k = 0;
            loop {
                if k == n {
                    return best;
                }
                lens[k] += 1;
                if lens[k] <= max {
                    break;
                }
                lens[k] = 1;
                k += 1;
            }
        }
    }

    #[test]
    fn two_symbols() {
        let cb = CodeBook::from_frequencies(&freqs(&[(0, 1), (1, 1)])).unwrap();
        assert_eq!(length_of(&cb, 0), 1);
        assert_eq!(length_of(&cb, 1), 1);
    }

    #[test]
    fn three_symbols_match_brute_force() {
        // a=0, b=1, c=2
        let cb = CodeBook::from_frequencies(&freqs(&[(0, 1), (1, 1), (2, 2)])).unwrap();
        assert_eq!(
            (length_of(&cb, 0), length_of(&cb, 1), length_of(&cb, 2)),
            (2, 2, 1)
        );
        assert_eq!(brute_force_cost(&[1, 1, 2]), 2 + 2 + 2);
    }

    #[test]
    fn single_symbol_gets_one_bit() {
        let cb = CodeBook::from_frequencies(&freqs(&[(9, 5)])).unwrap();
        assert_eq!(cb.code(9), Some((0, 1)));
        let (s, _) = cb.encode_sequence(&[9, 9, 9]).unwrap();
        assert_eq!(s.bit_len(), 3);
        let d: Vec<u32> = cb
            .decoder(&s, BitPos::default())
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(d, vec![9, 9, 9]);
    }

    #[test]
    fn empty_frequencies_rejected() {
        assert!(matches!(
            CodeBook::from_frequencies(&BTreeMap::new()),
            Err(Error::EmptyAlphabet)
        ));
    }

    #[test]
    fn abab_bits() {
        let cb = CodeBook::from_frequencies(&freqs(&[(0, 1), (1, 1)])).unwrap();
        assert_eq!(cb.code(0), Some((0, 1)));
        assert_eq!(cb.code(1), Some((1, 1)));
        let (s, ends) = cb.encode_sequence(&[0, 1, 0, 1]).unwrap();
        assert_eq!(s.bit_len(), 4);
        assert_eq!(s.bytes(), &[0b0101_0000]);
        assert_eq!(ends.last().unwrap().offset(), 4);
        let mut d = cb.decoder(&s, BitPos::default()).unwrap();
        for want in [0, 1, 0, 1] {
            assert_eq!(d.decode_next().unwrap(), Some(want));
        }
        assert_eq!(d.decode_next().unwrap(), None);
    }

    #[test]
    fn empty_sequence() {
        let cb = CodeBook::from_frequencies(&freqs(&[(0, 1), (1, 1)])).unwrap();
        let (s, ends) = cb.encode_sequence(&[]).unwrap();
        assert_eq!((s.bit_len(), s.bytes().len(), ends.len()), (0, 0, 0));
    }

    #[test]
    fn unknown_symbol() {
        let cb = CodeBook::from_frequencies(&freqs(&[(0, 1), (1, 1)])).unwrap();
        assert!(matches!(
            cb.encode_sequence(&[2]),
            Err(Error::UnknownSymbol(2))
        ));
    }

    #[test]
    fn truncated_stream_is_corrupt() {
        let cb = CodeBook::from_frequencies(&freqs(&[(0, 1), (1, 1), (2, 2)])).unwrap();
        let (s, _) = cb.encode_sequence(&[0, 1]).unwrap();
        assert_eq!(s.bit_len(), 4);
        let cut = BitStream::from_parts(s.bytes().to_vec(), 3).unwrap();
        let mut d = cb.decoder(&cut, BitPos::default()).unwrap();
        assert_eq!(d.decode_next().unwrap(), Some(0));
        assert!(matches!(d.decode_next(), Err(Error::Corrupt(2))));
    }

    #[test]
    fn unmatched_pattern_is_corrupt() {
        let cb = CodeBook::from_frequencies(&freqs(&[(4, 3)])).unwrap();
        let s = BitStream::from_parts(vec![0b1000_0000], 1).unwrap();
        assert!(matches!(
            cb.decoder(&s, BitPos::default()).unwrap().decode_next(),
            Err(Error::Corrupt(0))
        ));
    }

    #[test]
    fn decoder_init_positions() {
        let cb = CodeBook::from_frequencies(&freqs(&[(0, 5), (1, 2), (2, 1), (3, 1)])).unwrap();
        let seq = [0, 1, 2, 3, 0, 0, 1, 3];
        let (s, ends) = cb.encode_sequence(&seq).unwrap();
        for (i, &e) in ends.iter().enumerate() {
            let mut d = cb.decoder(&s, e).unwrap();
            let rest: Vec<u32> = std::iter::from_fn(|| d.decode_next().unwrap()).collect();
            assert_eq!(rest, &seq[i + 1..]);
        }
        let end = BitPos::from_offset(s.bit_len());
        assert_eq!(cb.decoder(&s, end).unwrap().decode_next().unwrap(), None);
        assert!(matches!(
            cb.decoder(&s, BitPos::from_offset(s.bit_len() + 1)),
            Err(Error::OutOfStream { .. })
        ));
    }

    #[test]
    fn long_codes_use_slow_path() {
        // Fibonacci weights force a maximally skewed tree.
        let mut fib = vec![1u64, 1];
        while fib.len() < 20 {
            let n = fib.len();
            fib.push(fib[n - 1] + fib[n - 2]);
        }
        let f: BTreeMap<u32, u64> = fib
            .iter()
            .enumerate()
            .map(|(i, &w)| (i as u32, w))
            .collect();
        let cb = CodeBook::from_frequencies(&f).unwrap();
        assert_eq!(cb.max_len(), 19);
        let seq: Vec<u32> = (0..20).chain((0..20).rev()).collect();
        let (s, _) = cb.encode_sequence(&seq).unwrap();
        let d: Vec<u32> = cb
            .decoder(&s, BitPos::default())
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(d, seq);
    }

    #[test]
    fn brute_force_optimality_small_alphabets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.random_range(1..=6usize);
            let fs: Vec<u64> = (0..n).map(|_| rng.random_range(1..50)).collect();
            let f: BTreeMap<u32, u64> =
                fs.iter().enumerate().map(|(i, &w)| (i as u32, w)).collect();
            let cb = CodeBook::from_frequencies(&f).unwrap();
            let cost: u64 = f.iter().map(|(&s, &w)| w * length_of(&cb, s) as u64).sum();
            assert_eq!(cost, brute_force_cost(&fs), "freqs {fs:?}");
        }
    }

    #[test]
    fn serialization_roundtrip() {
        let cb = CodeBook::from_frequencies(&freqs(&[(0, 5), (7, 2), (300, 1)])).unwrap();
        let mut buf = Vec::new();
        cb.write_to(&mut buf);
        assert_eq!(buf.len() as u64, cb.serialized_size());
        let back = CodeBook::read_from(&mut Reader::new(&buf)).unwrap();
        assert_eq!(back, cb);
        assert_eq!(back.code(300), cb.code(300));
    }

    proptest! {
        #[test]
        fn kraft_prefix_free_and_entropy_bound(ws in prop::collection::vec(1u64..1000, 2..60)) {
            let f: BTreeMap<u32, u64> = ws.iter().enumerate().map(|(i, &w)| (i as u32 * 3, w)).collect();
            let cb = CodeBook::from_frequencies(&f).unwrap();
            let max = cb.max_len();
            let kraft: u128 = cb.lengths().iter().map(|&(_, l)| 1u128 << (max - l)).sum();
            prop_assert_eq!(kraft, 1u128 << max);
            let codes: Vec<(u64, u8)> = cb.lengths().iter().map(|&(s, _)| cb.code(s).unwrap()).collect();
            for (i, &(ca, la)) in codes.iter().enumerate() {
                for &(cb_, lb) in &codes[i + 1..] {
                    let (short, ls, long, ll) = if la <= lb { (ca, la, cb_, lb) } else { (cb_, lb, ca, la) };
                    prop_assert_ne!(long >> (ll - ls), short);
                }
            }
            let total: u64 = ws.iter().sum();
            let entropy: f64 = ws.iter().map(|&w| { let p = w as f64 / total as f64; -p * p.log2() }).sum();
            let avg: f64 = f.iter().map(|(&s, &w)| w as f64 * cb.code(s).unwrap().1 as f64).sum::<f64>() / total as f64;
            prop_assert!(avg >= entropy - 1e-9 && avg < entropy + 1.0);
        }

        #[test]
        fn roundtrip(seq in prop::collection::vec(0u32..300, 0..400)) {
            let mut f = BTreeMap::new();
            for &s in &seq { *f.entry(s).or_insert(0u64) += 1; }
            if f.is_empty() { f.insert(0, 1); }
            let cb = CodeBook::from_frequencies(&f).unwrap();
            let (s, ends) = cb.encode_sequence(&seq).unwrap();
            let total: u64 = f.iter().map(|(&s, &w)| if seq.is_empty() { 0 } else { w * cb.code(s).unwrap().1 as u64 }).sum();
            prop_assert_eq!(s.bit_len(), total);
            let back: Vec<u32> = cb.decoder(&s, BitPos::default()).unwrap().collect::<Result<_>>().unwrap();
            prop_assert_eq!(&back, &seq);
            if let Some(mid) = ends.get(seq.len() / 2) {
                let tail: Vec<u32> = cb.decoder(&s, *mid).unwrap().collect::<Result<_>>().unwrap();
                prop_assert_eq!(&tail[..], &seq[seq.len() / 2 + 1..]);
            }
        }
    }
}
