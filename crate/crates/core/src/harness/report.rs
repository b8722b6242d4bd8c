use std::io::Write;

use super::{EvalReport, RobustnessReport, ScopeBreakdown};
use crate::error::Result;

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|v| format!("{v:.prec$}")).unwrap_or_default()
}

/// `platform,accuracy_pct,latency_us,throughput_img_s,energy_nj`; timing
/// columns are empty for rows without a cycle-scoped measurement.
pub fn write_eval_csv(report: &EvalReport, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["platform", "accuracy_pct", "latency_us", "throughput_img_s", "energy_nj"])?;
    for r in &report.rows {
        out.write_record([
            r.platform.clone(),
            format!("{:.2}", r.accuracy_pct),
            opt(r.latency_us, 4),
            opt(r.throughput_img_s, 0),
            opt(r.energy_nj, 2),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `ratio,accuracy_pct`
pub fn write_robustness_csv(report: &RobustnessReport, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["ratio", "accuracy_pct"])?;
    for (p, a) in report.drop_ratios.iter().zip(&report.accuracies) {
        out.write_record([format!("{p:.2}"), format!("{a:.2}")])?;
    }
    out.flush()?;
    Ok(())
}

/// `phase,ms_per_image`
pub fn write_scope_csv(report: &ScopeBreakdown, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["phase", "ms_per_image"])?;
    for (name, ms) in report.phases() {
        out.write_record([name.to_string(), format!("{ms:.6}")])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::PlatformRow;

    #[test]
    fn table_layout() {
        let report = EvalReport {
            n: 1,
            accuracy_pct: 100.0,
            reference_accuracy_pct: 100.0,
            matches: 1,
            no_spike: 0,
            mean_service_cycles: 11.0,
            latency_us: 0.1375,
            throughput_img_s: 80e6 / 11.0,
            energy_nj: 31.5975,
            rows: vec![
                PlatformRow {
                    platform: "accel-pl-only".into(),
                    accuracy_pct: 87.4,
                    latency_us: Some(0.1375),
                    throughput_img_s: Some(80e6 / 11.0),
                    energy_nj: Some(31.5975),
                },
                PlatformRow {
                    platform: "dense-fp32".into(),
                    accuracy_pct: 87.7,
                    latency_us: None,
                    throughput_img_s: None,
                    energy_nj: None,
                },
            ],
        };
        let mut buf = Vec::new();
        write_eval_csv(&report, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "platform,accuracy_pct,latency_us,throughput_img_s,energy_nj\n\
             accel-pl-only,87.40,0.1375,7272727,31.60\n\
             dense-fp32,87.70,,,\n"
        );
    }

    #[test]
    fn robustness_layout() {
        let r = RobustnessReport { drop_ratios: vec![0.0, 0.25], accuracies: vec![90.0, 88.126], seed: 42 };
        let mut buf = Vec::new();
        write_robustness_csv(&r, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "ratio,accuracy_pct\n0.00,90.00\n0.25,88.13\n");
    }
}
