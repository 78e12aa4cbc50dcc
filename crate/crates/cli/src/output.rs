//! CSV formatting and plot-script emission.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // Also folds −0.
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

/// Destination of a CSV table: a file or stdout.
pub fn open(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn io_err(e: io::Error) -> CliError {
    CliError::Config(format!("write failed: {e}"))
}

/// `<out>.excluded.csv` next to `out`.
pub fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".excluded.csv");
    PathBuf::from(s)
}

/// Python/matplotlib script plotting `y` against `x` from `csv`.
pub fn plot_script(csv: &Path, x: &str, y: &str, xlabel: &str, ylabel: &str) -> String {
    let image = csv.with_extension("png");
    format!(
        r#"import csv
import math

import matplotlib.pyplot as plt

xs, ys = [], []
with open({csv:?}) as f:
    for row in csv.DictReader(f):
        y = float(row[{y:?}])
        if math.isfinite(y):
            xs.append(float(row[{x:?}]))
            ys.append(y)

plt.plot(xs, ys, "o-", markersize=3)
plt.xlabel({xlabel:?})
plt.ylabel({ylabel:?})
plt.tight_layout()
plt.savefig({image:?}, dpi=150)
"#,
        csv = csv.display().to_string(),
        image = image.display().to_string(),
    )
}
