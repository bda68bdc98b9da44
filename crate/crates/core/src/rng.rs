//! Counter-based pseudo-random numbers.
//!
//! Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
//! A 64-bit seed forms the key; a 128-bit counter is incremented per block of
//! four 32-bit outputs. Independent streams take distinct values in the upper
//! counter words, so parallel generators never share state. The output of
//! this generator is part of the on-disk format of every simulated artifact:
//! do not change the algorithm, the counter layout or the float conversions.

const MUL0: u32 = 0xD251_1F53;
const MUL1: u32 = 0xCD9E_8D57;
const WEYL0: u32 = 0x9E37_79B9;
const WEYL1: u32 = 0xBB67_AE85;

/// Ten-round Philox bijection of one counter block under `key`.
pub fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(WEYL0);
            key[1] = key[1].wrapping_add(WEYL1);
        }
        let p0 = u64::from(MUL0) * u64::from(ctr[0]);
        let p1 = u64::from(MUL1) * u64::from(ctr[2]);
        ctr = [((p1 >> 32) as u32) ^ ctr[1] ^ key[0], p1 as u32, ((p0 >> 32) as u32) ^ ctr[3] ^ key[1], p0 as u32];
    }
    ctr
}

#[derive(Debug, Clone)]
pub struct Philox4x32 {
    key: [u32; 2],
    counter: [u32; 4],
    buf: [u32; 4],
    used: usize,
}

impl Philox4x32 {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Generator for stream `stream` under `seed`; streams never overlap for
    /// fewer than 2^64 blocks each.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { key: [seed as u32, (seed >> 32) as u32], counter: [0, 0, stream as u32, (stream >> 32) as u32], buf: [0; 4], used: 4 }
    }

    fn refill(&mut self) {
        self.buf = philox4x32_10(self.counter, self.key);
        let (lo, carry) = self.counter[0].overflowing_add(1);
        self.counter[0] = lo;
        if carry {
            self.counter[1] = self.counter[1].wrapping_add(1);
        }
        self.used = 0;
    }

    pub fn next_u32(&mut self) -> u32 {
        if self.used == 4 {
            self.refill();
        }
        let v = self.buf[self.used];
        self.used += 1;
        v
    }

    pub fn next_u64(&mut self) -> u64 {
        let hi = u64::from(self.next_u32());
        let lo = u64::from(self.next_u32());
        (hi << 32) | lo
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Index in `0..n`, by multiply-shift on 64 bits.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open().ln()
    }

    /// Standard normal by Box–Muller (one variate per call, the sine branch
    /// is discarded so the stream position is always two u64 per draw).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Standard Laplace (double exponential).
    pub fn laplace(&mut self) -> f64 {
        let u = self.uniform_open();
        if u < 0.5 {
            (2.0 * u).ln()
        } else {
            -(2.0 * (1.0 - u)).ln()
        }
    }
}
