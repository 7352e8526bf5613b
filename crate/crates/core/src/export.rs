//! Plot-ready output files.

use std::io::Write;

use serde::Serialize;

use crate::elicit::DecisionWeightSample;
use crate::error::Result;

#[derive(Serialize)]
struct SampleRow<'a> {
    k: u32,
    n: u32,
    prob_exact: String,
    weight: &'a f64,
}

/// Samples as CSV with columns `k, n, prob_exact, weight`. The anchors are
/// written as `0/1` and `1/1`.
pub fn write_samples_csv<W: Write>(samples: &[DecisionWeightSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(SampleRow {
            k: s.provenance.k,
            n: s.provenance.n,
            prob_exact: s.prob.to_string(),
            weight: &s.weight,
        })?;
    }
    if samples.is_empty() {
        w.write_record(["k", "n", "prob_exact", "weight"])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
