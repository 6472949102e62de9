//! `dhs report`: reload a saved evaluation report and re-render it.

use anyhow::{Context, Result};

use dhs_core::eval::EvalReport;

use crate::ReportArgs;

pub fn run(args: ReportArgs) -> Result<()> {
    let report = EvalReport::read_json(&args.input)
        .with_context(|| format!("reading report {}", args.input.display()))?;
    print!("{}", report.render_text());
    if let Some(path) = &args.csv {
        std::fs::write(path, report.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote per-category CSV to {}", path.display());
    }
    Ok(())
}
