//! JSON problem files.
//!
//! ```json
//! {
//!   "schema": "quanco-problem/1",
//!   "revenue": 6.0,
//!   "variant": "cone",
//!   "biomasses": [{ "c": 160.2, "g0": 76.3, "n": 1.9, "k": 0.11 }]
//! }
//! ```
//!
//! Exponential and Cauchy biomasses carry `tau` instead of `n` and `k`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Biomass, BiomassProblem, Variant, YieldParams};
use crate::error::{Error, Result};

pub const SCHEMA_TAG: &str = "quanco-problem/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: String,
    pub revenue: f64,
    pub variant: Variant,
    pub biomasses: Vec<BiomassRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiomassRecord {
    pub c: f64,
    pub g0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl ProblemFile {
    pub fn from_problem(p: &BiomassProblem) -> Result<Self> {
        let variant = p.variant().ok_or_else(|| Error::Format("problem mixes yield families".into()))?;
        let biomasses = p
            .biomasses()
            .iter()
            .map(|b| {
                let (n, k, tau) = match b.curve {
                    YieldParams::Cone { k, n } => (Some(n), Some(k), None),
                    YieldParams::Exponential { tau } | YieldParams::Cauchy { tau } => (None, None, Some(tau)),
                };
                BiomassRecord { c: b.cost, g0: b.g0, n, k, tau }
            })
            .collect();
        Ok(Self { schema: SCHEMA_TAG.into(), revenue: p.revenue(), variant, biomasses })
    }

    pub fn into_problem(self) -> Result<BiomassProblem> {
        if self.schema != SCHEMA_TAG {
            return Err(Error::Format(format!("expected schema {SCHEMA_TAG:?}, found {:?}", self.schema)));
        }
        let variant = self.variant;
        let biomasses = self
            .biomasses
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let missing = |field: &str| Error::Format(format!("biomass {i}: {variant} curve needs `{field}`"));
                let curve = match variant {
                    Variant::Cone => {
                        if r.tau.is_some() {
                            return Err(Error::Format(format!("biomass {i}: cone curve takes no `tau`")));
                        }
                        YieldParams::Cone { k: r.k.ok_or_else(|| missing("k"))?, n: r.n.ok_or_else(|| missing("n"))? }
                    }
                    Variant::Exponential | Variant::Cauchy => {
                        if r.k.is_some() || r.n.is_some() {
                            return Err(Error::Format(format!("biomass {i}: {variant} curve takes only `tau`")));
                        }
                        let tau = r.tau.ok_or_else(|| missing("tau"))?;
                        if variant == Variant::Exponential {
                            YieldParams::Exponential { tau }
                        } else {
                            YieldParams::Cauchy { tau }
                        }
                    }
                };
                Biomass::new(r.c, r.g0, curve)
            })
            .collect::<Result<Vec<_>>>()?;
        BiomassProblem::new(biomasses, self.revenue)
    }
}

pub fn write_problem<W: Write>(p: &BiomassProblem, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &ProblemFile::from_problem(p)?)?;
    Ok(())
}

pub fn read_problem<R: Read>(input: R) -> Result<BiomassProblem> {
    let file: ProblemFile = serde_json::from_reader(input)?;
    file.into_problem()
}

#[cfg(test)]
mod tests {
    use super::super::tests::sample_problem;
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        for v in Variant::ALL {
            let p = sample_problem(v, 5, 3);
            let mut buf = Vec::new();
            write_problem(&p, &mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.contains(SCHEMA_TAG));
            assert_eq!(read_problem(buf.as_slice()).unwrap(), p);
        }
    }

    #[test]
    fn rejects_bad_documents() {
        let cases = [
            r#"{"schema":"quanco-problem/2","revenue":6,"variant":"cone","biomasses":[{"c":1,"g0":1,"n":1,"k":1}]}"#,
            r#"{"schema":"quanco-problem/1","revenue":6,"variant":"cone","biomasses":[{"c":1,"g0":1,"n":1}]}"#,
            r#"{"schema":"quanco-problem/1","revenue":6,"variant":"cauchy","biomasses":[{"c":1,"g0":1,"tau":1,"k":2}]}"#,
            r#"{"schema":"quanco-problem/1","revenue":6,"variant":"cauchy","biomasses":[]}"#,
            r#"{"schema":"quanco-problem/1","revenue":6,"variant":"cauchy","biomasses":[{"c":-1,"g0":1,"tau":1}]}"#,
            r#"{"schema":"quanco-problem/1","revenue":6,"variant":"gompertz","biomasses":[]}"#,
            r#"not json"#,
        ];
        for text in cases {
            assert!(read_problem(text.as_bytes()).is_err(), "{text}");
        }
    }

    #[test]
    fn mixed_families_cannot_be_written() {
        let a = Biomass::new(1.0, 2.0, YieldParams::Cauchy { tau: 1.0 }).unwrap();
        let b = Biomass::new(1.0, 2.0, YieldParams::Exponential { tau: 1.0 }).unwrap();
        let p = BiomassProblem::new(vec![a, b], 6.0).unwrap();
        assert!(write_problem(&p, Vec::new()).is_err());
    }
}
