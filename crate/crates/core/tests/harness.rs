use std::path::Path;

use bpe_delay::algorithms::Algorithm;
use bpe_delay::diagnostics::audit_delays;
use bpe_delay::harness::{
    cli_main, render_svg, run_suite, write_traces_csv, ExperimentConfig, SuiteResults,
};
use bpe_delay::synth::load_function_csv;

const SMALL: &str = r#"
[experiment]
name = "small"
algorithms = ["bpe_delay", "gp_ucb_sdf"]
horizon = 150
trials = 3
seed = 21
[domain]
resolution = 10
[delay]
rate = 8.0
xi = 4.0
b = 1.0
"#;

fn small() -> ExperimentConfig {
    ExperimentConfig::from_toml_str(SMALL).unwrap()
}

fn suite() -> SuiteResults {
    run_suite(&small()).unwrap()
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = cli_main(std::iter::once("bpe-delay").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn suite_shape_and_matched_seeds() {
    let r = suite();
    assert_eq!(r.trials.len(), 6);
    assert_eq!(r.curves.len(), 2);
    for alg in [Algorithm::BpeDelay, Algorithm::GpUcbSdf] {
        let seeds: Vec<u64> = r.traces_for(alg).map(|t| t.seed).collect();
        assert_eq!(seeds, vec![21, 22, 23]);
        assert!(r.traces_for(alg).all(|t| t.trace.len() == 150));
    }
    // matched seeds: both algorithms see the same delay at each step
    let a: Vec<_> = r.traces_for(Algorithm::BpeDelay).collect();
    let b: Vec<_> = r.traces_for(Algorithm::GpUcbSdf).collect();
    for (x, y) in a.iter().zip(&b) {
        let dx: Vec<u64> = x.trace.steps.iter().map(|s| s.delay()).collect();
        let dy: Vec<u64> = y.trace.steps.iter().map(|s| s.delay()).collect();
        assert_eq!(dx, dy);
    }
}

#[test]
fn suite_is_deterministic_across_thread_counts() {
    let a = suite();
    let mut cfg = small();
    cfg.threads = 2;
    let b = run_suite(&cfg).unwrap();
    assert_eq!(a.trials, b.trials);
    assert_eq!(a.curves, b.curves);
}

#[test]
fn aggregate_recomputes_from_traces() {
    let r = suite();
    for c in &r.curves {
        let finals = r.final_regrets(c.algorithm);
        let n = finals.len() as f64;
        let mean = finals.iter().sum::<f64>() / n;
        let sd = (finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((c.final_mean() - mean).abs() < 1e-9);
        assert!((c.half_std.last().unwrap() - 0.5 * sd).abs() < 1e-9);
        assert!(c.mean.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }
}

#[test]
fn traces_csv_roundtrip() {
    let r = suite();
    let mut buf = Vec::new();
    write_traces_csv(&mut buf, &r.trials).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["algorithm", "trial", "t", "round", "chosen_index", "inst_regret", "cum_regret", "arrived_at"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6 * 150);
    let mut i = 0;
    for tr in &r.trials {
        let mut cum = 0.0;
        for s in &tr.trace.steps {
            let row = &rows[i];
            assert_eq!(row.len(), 8);
            assert_eq!(&row[0], tr.algorithm.name());
            assert_eq!(row[1].parse::<usize>().unwrap(), tr.trial);
            assert_eq!(row[2].parse::<u64>().unwrap(), s.t);
            assert_eq!(row[4].parse::<usize>().unwrap(), s.chosen);
            assert_eq!(row[5].parse::<f64>().unwrap(), s.inst_regret);
            cum += s.inst_regret;
            assert_eq!(row[6].parse::<f64>().unwrap(), cum);
            assert_eq!(row[7].parse::<u64>().unwrap(), s.arrival);
            i += 1;
        }
    }
}

#[test]
fn svg_is_well_formed_with_legend() {
    let r = suite();
    let svg = render_svg(&r.curves, "small & <fast>");
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.attribute("version"), Some("1.1"));
    let legends: Vec<_> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("legend"))
        .collect();
    assert_eq!(legends.len(), 2);
    let names: Vec<&str> = legends
        .iter()
        .filter_map(|g| g.descendants().find(|n| n.has_tag_name("text")).and_then(|t| t.text()))
        .collect();
    assert_eq!(names, ["bpe_delay", "gp_ucb_sdf"]);
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 2);
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polygon")).count(), 2);
    assert!(doc.descendants().any(|n| n.text() == Some("small & <fast>")));
}

#[test]
fn delay_audit_counts_envelope_exceedances() {
    let r = suite();
    let params = small().delay;
    let dp = params.params().unwrap();
    for t in r.traces_for(Algorithm::BpeDelay) {
        let audit = audit_delays(&t.trace, Some(dp), 0.1);
        assert_eq!(audit.steps, 150);
        assert!(audit.violations <= audit.steps);
        assert_eq!(audit.run_violated(), audit.violations > 0);
    }
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn cli_compare_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let (code, text) = cli(&["compare", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(text.contains("bpe_delay") && text.contains("gp_ucb_sdf"));
    for f in ["traces.csv", "summary.csv", "rounds.csv", "regret.svg"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 150);
}

#[test]
fn cli_run_selects_one_algorithm_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    let (code, _) = cli(&["--quiet", "run", &cfg, "--algorithm", "bpe", "--seed", "5", "--out", o]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(out.join("traces.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.starts_with("bpe,")));
    assert_eq!(text.lines().count(), 1 + 3 * 150);
    let (code, _) = cli(&["run", &cfg, "--algorithm", "nope", "--out", o]);
    assert_eq!(code, 2);
}

#[test]
fn cli_bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        "[experiment]\nhorizon = 0\n",
        "[kernel]\nfamily = \"rbf2\"\n",
        "[delay]\nrate = 25.0\n",
        "[typo]\nx = 1\n",
        "not toml at all [",
    ] {
        let cfg = write_config(dir.path(), bad);
        assert_eq!(cli(&["run", &cfg]).0, 2, "{bad}");
    }
    assert_eq!(cli(&["frobnicate"]).0, 2);
}

#[test]
fn cli_gen_fn_exports_the_objective() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let file = dir.path().join("f.csv");
    let (code, _) = cli(&["--quiet", "gen-fn", &cfg, "--out", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (domain, values) = load_function_csv(&file).unwrap();
    assert_eq!(domain.len(), 100);
    let r = suite();
    assert_eq!(&values[..], &r.problem.truth[..]);

    // a config pointing at the exported file runs the same problem
    let text = format!(
        "{SMALL}[function]\npath = \"{}\"\n[confidence]\nc_k = {}\n",
        file.display(),
        r.problem.c_k
    );
    let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    let again = run_suite(&cfg).unwrap();
    assert_eq!(again.trials, r.trials);
}

#[test]
fn cli_schedule_prints_rounds() {
    let (code, text) = cli(&["schedule", "--T", "2000", "--u", "73.4"]);
    assert_eq!(code, 0);
    assert!(text.starts_with("T=2000 u=73.4 R="));
    assert!(text.contains("q=[45,"));
    assert!(text.contains("t=[119,"));
}
