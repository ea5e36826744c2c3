//! Text and machine renderings of analysis and self-test reports.
//!
//! Machine format, one record per line:
//!
//! ```text
//! RUN name=<name> dim=<n> points=<count> seed=<seed|explicit> tol=<tol>
//! POINT index=<i> coords=<x0>,<x1>,...
//! CHECK <name> point=<i|all> residual=<r> status=PASS|FAIL
//! FIT <name> point=<i> value=<v|undefined>
//! ERROR point=<i> message="<text>"
//! VERDICT <name> value=true|false
//! SPREAD <name> min=<v> max=<v>
//! SUMMARY checks=<n> failed=<n> errors=<n> exit=<code>
//! ```

use std::fmt::Write;

use crate::analysis::{CheckRecord, ClassificationReport, PointRef};
use crate::config::Format;
use crate::selftest::SelftestReport;

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.6e}")
    }
}

fn value(v: f64) -> String {
    format!("{v:.12e}")
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn check_line(out: &mut String, c: &CheckRecord) {
    let point = match c.point {
        PointRef::Index(i) => i.to_string(),
        PointRef::All => "all".into(),
    };
    let _ = writeln!(
        out,
        "CHECK {} point={} residual={} status={}",
        c.name,
        point,
        num(c.residual),
        status(c.pass)
    );
}

pub fn render_analysis(r: &ClassificationReport, format: Format) -> String {
    match format {
        Format::Machine => machine(r),
        Format::Text => text(r),
    }
}

fn machine(r: &ClassificationReport) -> String {
    let mut out = String::new();
    let seed = r.seed.map_or("explicit".to_string(), |s| s.to_string());
    let _ = writeln!(
        out,
        "RUN name={} dim={} points={} seed={} tol={}",
        r.name,
        r.dim,
        r.points.len(),
        seed,
        num(r.tol)
    );
    for p in &r.points {
        let coords: Vec<String> = p.point.iter().map(|v| value(*v)).collect();
        let _ = writeln!(out, "POINT index={} coords={}", p.index, coords.join(","));
        for c in &p.checks {
            check_line(&mut out, c);
        }
        for f in &p.fits {
            let v = f.value.map_or("undefined".to_string(), value);
            let _ = writeln!(out, "FIT {} point={} value={}", f.name, p.index, v);
        }
        if let Some(e) = &p.error {
            let _ = writeln!(out, "ERROR point={} message={:?}", p.index, e);
        }
    }
    for c in &r.global_checks {
        check_line(&mut out, c);
    }
    for (name, v) in &r.verdicts {
        let _ = writeln!(out, "VERDICT {name} value={v}");
    }
    for s in &r.spreads {
        let _ = writeln!(out, "SPREAD {} min={} max={}", s.name, value(s.min), value(s.max));
    }
    let _ = writeln!(
        out,
        "SUMMARY checks={} failed={} errors={} exit={}",
        r.checks().count(),
        r.failed(),
        r.errors().count(),
        r.exit_code()
    );
    out
}

fn text(r: &ClassificationReport) -> String {
    let mut out = String::new();
    let seed = r.seed.map_or("explicit points".to_string(), |s| format!("seed {s}"));
    let _ = writeln!(
        out,
        "{} (n = {}, {} points, {}, tol {:e})",
        r.name,
        r.dim,
        r.points.len(),
        seed,
        r.tol
    );

    // per check name: worst residual, passes, runs
    let mut rows: Vec<(String, f64, usize, usize)> = Vec::new();
    for c in r.checks() {
        match rows.iter_mut().find(|row| row.0 == c.name) {
            Some(row) => {
                if c.residual.is_nan() || c.residual > row.1 {
                    row.1 = c.residual;
                }
                row.2 += usize::from(c.pass);
                row.3 += 1;
            }
            None => rows.push((c.name.clone(), c.residual, usize::from(c.pass), 1)),
        }
    }
    let _ = writeln!(out, "\nchecks{:>44}{:>10}", "worst", "passed");
    for (name, worst, pass, total) in &rows {
        let flag = if pass == total { "" } else { "  <-- FAIL" };
        let _ = writeln!(out, "  {name:<36}{:>12}{:>10}{flag}", num(*worst), format!("{pass}/{total}"));
    }

    let _ = writeln!(out, "\nverdicts");
    for (name, v) in &r.verdicts {
        let _ = writeln!(out, "  {name:<36}{}", if *v { "yes" } else { "no" });
    }

    if !r.spreads.is_empty() {
        let _ = writeln!(out, "\nfitted scalars{:>36}{:>20}", "min", "max");
        for s in &r.spreads {
            let _ = writeln!(out, "  {:<32}{:>16.9e}{:>20.9e}", s.name, s.min, s.max);
        }
    }

    let errors: Vec<_> = r.errors().collect();
    if !errors.is_empty() {
        let _ = writeln!(out, "\nerrors");
        for (i, e) in errors {
            let _ = writeln!(out, "  point {i}: {e}");
        }
    }
    let _ = writeln!(
        out,
        "\n{} checks, {} failed, {} point errors; exit {}",
        r.checks().count(),
        r.failed(),
        r.errors().count(),
        r.exit_code()
    );
    out
}

/// Machine lines are `CRITERION <id> name=<name> residual=<r> threshold=<t> status=<s>`
/// followed by `DETAIL <id> <label> residual=<r> threshold=<t> status=<s>`.
pub fn render_selftest(r: &SelftestReport, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Machine => {
            let _ = writeln!(out, "SELFTEST seed={} points={}", r.seed, r.points);
            for c in &r.criteria {
                let _ = writeln!(
                    out,
                    "CRITERION {} name={} residual={} threshold={} status={}",
                    c.id,
                    c.name,
                    num(c.residual),
                    num(c.threshold),
                    status(c.pass)
                );
                for d in &c.details {
                    let _ = writeln!(
                        out,
                        "DETAIL {} {} residual={} threshold={} status={}",
                        c.id,
                        d.label,
                        num(d.residual),
                        num(d.threshold),
                        status(d.pass)
                    );
                }
            }
            let _ = writeln!(
                out,
                "SUMMARY criteria={} failed={} exit={}",
                r.criteria.len(),
                r.failed(),
                r.exit_code()
            );
        }
        Format::Text => {
            let _ = writeln!(out, "self-test (seed {}, {} points per sample)", r.seed, r.points);
            for c in &r.criteria {
                let _ = writeln!(
                    out,
                    "\n[{}] {} {:<34} residual {} (threshold {})",
                    status(c.pass),
                    c.id,
                    c.name,
                    num(c.residual),
                    num(c.threshold)
                );
                for d in &c.details {
                    let _ = writeln!(
                        out,
                        "    {:<4} {:<40} {} / {}",
                        status(d.pass),
                        d.label,
                        num(d.residual),
                        num(d.threshold)
                    );
                }
            }
            let _ = writeln!(
                out,
                "\n{} criteria, {} failed; exit {}",
                r.criteria.len(),
                r.failed(),
                r.exit_code()
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::run_analysis;
    use crate::config::AnalysisConfig;

    #[test]
    fn machine_records_are_well_formed() {
        let mut cfg = AnalysisConfig::from_builtin("minkowski", &[]).unwrap();
        cfg.set_count(2);
        let r = run_analysis(&cfg).unwrap();
        let s = render_analysis(&r, Format::Machine);
        assert!(s.starts_with("RUN name=minkowski dim=4 points=2 seed=0 tol=1.000000e-8\n"));
        for line in s.lines() {
            let tag = line.split(' ').next().unwrap();
            assert!(["RUN", "POINT", "CHECK", "FIT", "VERDICT", "SPREAD", "SUMMARY"].contains(&tag), "{line}");
            if tag == "CHECK" {
                let f: Vec<&str> = line.split(' ').collect();
                assert_eq!(f.len(), 5);
                assert!(f[2].starts_with("point=") && f[3].starts_with("residual=") && f[4].starts_with("status="));
            }
        }
        assert!(s.contains("CHECK expect.flat point=all residual=0.000000e0 status=PASS"));
        assert!(s.ends_with("exit=0\n"));
        assert_eq!(s, render_analysis(&run_analysis(&cfg).unwrap(), Format::Machine));
        assert!(render_analysis(&r, Format::Text).contains("verdicts"));
    }
}
