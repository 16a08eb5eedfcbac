mod common;

use ridge_trace::export::{self, ExportFormat};
use ridge_trace::paths;
use ridge_trace::risk::RiskMode;
use ridge_trace::trace::{self, TraceBundle, TraceType};
use serde_json::Value;

use common::{portland, FULL};

fn bundles() -> Vec<TraceBundle> {
    let (m, cf) = portland(&FULL);
    let (m1, cf1) = portland(&["p4caf"]);
    vec![
        trace::assemble_traces(
            &cf,
            &paths::build_efficient_path(&cf, 20).unwrap(),
            RiskMode::Ml,
            &m.x_names,
        )
        .unwrap(),
        trace::assemble_traces(
            &cf,
            &paths::build_qm_path(&cf, -5.0, 8).unwrap(),
            RiskMode::Unbiased,
            &m.x_names,
        )
        .unwrap(),
        trace::assemble_traces(
            &cf1,
            &paths::build_yonx_path(&m1, 8).unwrap(),
            RiskMode::Ml,
            &[],
        )
        .unwrap(),
    ]
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

#[test]
fn csv_round_trip_preserves_values() {
    for bundle in bundles() {
        let dir = tempfile::tempdir().unwrap();
        let files = export::export_traces(&bundle, ExportFormat::Csv, dir.path()).unwrap();
        assert_eq!(files.len(), 6);
        for t in TraceType::ALL {
            let table =
                export::read_trace_csv(&dir.path().join(format!("{}.csv", t.name()))).unwrap();
            assert_eq!(table.headers[0], "m");
            assert_eq!(&table.headers[1..], t.headers(&bundle).as_slice());
            assert_eq!(table.m.len(), bundle.len());
            for (m, m0) in table.m.iter().zip(bundle.lattice()) {
                assert!(same(*m, *m0));
            }
            for (row, row0) in table.rows.iter().zip(t.rows(&bundle)) {
                match (row, row0) {
                    (Some(a), Some(b)) => assert!(a.iter().zip(&b).all(|(x, y)| same(*x, *y))),
                    (None, None) => {}
                    other => panic!("{t}: row presence differs: {other:?}"),
                }
            }
        }
        // no temporary files left behind
        let names: Vec<String> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        assert!(names.iter().all(|n| !n.starts_with('.')), "{names:?}");
    }
}

#[test]
fn json_round_trip_preserves_values() {
    for bundle in bundles() {
        let dir = tempfile::tempdir().unwrap();
        let files = export::export_traces(&bundle, ExportFormat::Json, dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        let doc: Value =
            serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
        let num = |v: &Value| match v {
            Value::Number(n) => n.as_f64().unwrap(),
            Value::String(s) => s.parse::<f64>().unwrap(),
            other => panic!("not a number: {other}"),
        };
        let m: Vec<f64> = doc["m"].as_array().unwrap().iter().map(num).collect();
        assert_eq!(m.len(), bundle.len());
        assert!(m.iter().zip(bundle.lattice()).all(|(a, b)| same(*a, *b)));
        assert!(same(num(&doc["mStar"]), bundle.m_star()));
        for (key, rows) in [
            ("coef", &bundle.coef),
            ("rmse", &bundle.rmse),
            ("exev", &bundle.exev),
        ] {
            for (r, r0) in doc[key].as_array().unwrap().iter().zip(rows) {
                let r: Vec<f64> = r.as_array().unwrap().iter().map(num).collect();
                assert!(r.iter().zip(r0).all(|(a, b)| same(*a, *b)), "{key}");
            }
        }
        for (v, v0) in doc["lr"].as_array().unwrap().iter().zip(&bundle.lr) {
            assert!(same(num(v), *v0));
        }
        for (v, v0) in doc["infd"].as_array().unwrap().iter().zip(&bundle.infd) {
            assert_eq!(v.is_null(), v0.is_none());
        }
        assert_eq!(doc["p"], bundle.path.p);
    }
}

#[test]
fn infinite_values_survive_export() {
    let bundle = &bundles()[0];
    assert_eq!(bundle.lr[0], f64::INFINITY);
    let csv = export::trace_csv(bundle, TraceType::Lr).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "0,inf");
    let doc = export::bundle_to_json(bundle);
    assert_eq!(doc["lr"][0], Value::String("inf".into()));
}

#[test]
fn csv_output_is_stable() {
    let a = bundles();
    let b = bundles();
    for (x, y) in a.iter().zip(&b) {
        for t in TraceType::ALL {
            assert_eq!(
                export::trace_csv(x, t).unwrap(),
                export::trace_csv(y, t).unwrap()
            );
        }
    }
}
