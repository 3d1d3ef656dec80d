use std::fmt;

/// Deterministic injective byte encoding of a group element.
///
/// Keys are only comparable within one backend. The first byte of every key
/// produced by [`KeyBuilder::new`] is a layout tag so that keys from
/// different layouts never collide by accident.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Box<[u8]>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

/// Layout tags, bumped whenever an encoding changes.
pub mod layout {
    pub const FREE_WORD: u8 = 0x01;
    pub const ABELIAN: u8 = 0x02;
    pub const FG_AUTOMATON: u8 = 0x03;
    pub const WREATH: u8 = 0x04;
    pub const PAIR: u8 = 0x05;
    pub const FREE_PRODUCT: u8 = 0x06;
}

#[derive(Debug, Default)]
pub struct KeyBuilder {
    buf: Vec<u8>,
}

impl KeyBuilder {
    pub fn new(tag: u8) -> Self {
        let mut buf = Vec::with_capacity(32);
        buf.push(tag);
        KeyBuilder { buf }
    }

    /// Builder without a layout tag, for callers that write their own.
    pub fn raw() -> Self {
        KeyBuilder { buf: Vec::with_capacity(32) }
    }

    pub fn push_raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn push_u8(&mut self, b: u8) -> &mut Self {
        self.buf.push(b);
        self
    }

    /// LEB128 unsigned varint.
    pub fn push_varint(&mut self, mut v: u64) -> &mut Self {
        loop {
            let byte = (v & 0x7f) as u8;
            v >>= 7;
            if v == 0 {
                self.buf.push(byte);
                return self;
            }
            self.buf.push(byte | 0x80);
        }
    }

    /// Zigzag-encoded signed varint.
    pub fn push_signed(&mut self, v: i64) -> &mut Self {
        self.push_varint(((v << 1) ^ (v >> 63)) as u64)
    }

    /// Length-prefixed byte run, used to nest keys.
    pub fn push_nested(&mut self, bytes: &[u8]) -> &mut Self {
        self.push_varint(bytes.len() as u64);
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn finish(self) -> CanonicalKey {
        CanonicalKey(self.buf.into_boxed_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varints_are_prefix_free() {
        let mut a = KeyBuilder::new(0);
        a.push_varint(127).push_varint(0);
        let mut b = KeyBuilder::new(0);
        b.push_varint(128);
        assert_ne!(a.finish(), b.finish());
    }

    #[test]
    fn zigzag_distinguishes_sign() {
        let mut a = KeyBuilder::new(0);
        a.push_signed(-1);
        let mut b = KeyBuilder::new(0);
        b.push_signed(1);
        assert_ne!(a.finish(), b.finish());
    }
}
