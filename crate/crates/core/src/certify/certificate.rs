use alloc::string::String;
use alloc::vec::Vec;

/// FNV-1a over the bit patterns of the inputs of a certificate.
#[derive(Debug, Clone, Copy)]
pub struct InputDigest(u64);

impl Default for InputDigest {
    fn default() -> Self {
        Self::new()
    }
}

impl InputDigest {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    pub fn new() -> Self {
        Self(Self::OFFSET)
    }

    pub fn bytes(mut self, bytes: &[u8]) -> Self {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
        self
    }

    pub fn f64(self, x: f64) -> Self {
        self.bytes(&x.to_bits().to_le_bytes())
    }

    pub fn f64s(self, xs: &[f64]) -> Self {
        xs.iter().fold(self, |d, x| d.f64(*x))
    }

    pub fn u64(self, x: u64) -> Self {
        self.bytes(&x.to_le_bytes())
    }

    pub fn str(self, s: &str) -> Self {
        self.bytes(s.as_bytes()).bytes(&[0])
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

/// Record that `measured ≤ bound + tolerance` (or not).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    pub name: String,
    /// Hex FNV-1a digest of the inputs.
    pub inputs: String,
    pub bound: f64,
    pub measured: f64,
    /// `bound − measured`.
    pub margin: f64,
    pub tolerance: f64,
    pub status: Status,
    pub seed: Option<u64>,
    /// Named auxiliary quantities.
    pub metrics: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl Certificate {
    /// Pass iff `measured ≤ bound + tolerance`; NaN on either side fails.
    pub fn check(name: &str, inputs: InputDigest, bound: f64, measured: f64, tolerance: f64) -> Self {
        let pass = measured <= bound + tolerance;
        Self::with_status(name, inputs, bound, measured, tolerance, if pass { Status::Pass } else { Status::Fail })
    }

    pub fn with_status(name: &str, inputs: InputDigest, bound: f64, measured: f64, tolerance: f64, status: Status) -> Self {
        Self {
            name: name.into(),
            inputs: alloc::format!("{:016x}", inputs.finish()),
            bound,
            measured,
            margin: bound - measured,
            tolerance,
            status,
            seed: None,
            metrics: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.push((key.into(), value));
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Worst status of a batch (fail dominates inconclusive dominates pass).
pub fn worst_status<'a>(certs: impl IntoIterator<Item = &'a Certificate>) -> Status {
    certs.into_iter().map(|c| c.status).max().unwrap_or(Status::Pass)
}
