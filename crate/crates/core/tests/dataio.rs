use ccp_netting::dataio::{
    builtin_notionals, read_dump, render_csv, render_ratio_tables, to_json, write_report, NotionalTable, RunConfig,
    DUMP_FILE,
};
use ccp_netting::montecarlo::{attach_analytic, simulate};

fn small_report() -> ccp_netting::montecarlo::RiskReport {
    let mut cfg = RunConfig::default();
    cfg.paths = 3_000;
    cfg.mirror_dealers = false;
    cfg.histogram_paths = 1_000;
    let run = cfg.prepare().unwrap();
    let mut report = simulate(&run.market, &run.model, &run.scenarios, &run.options).unwrap();
    report.metadata.notes.extend(run.notes);
    attach_analytic(&mut report, &run.market, &run.scenarios).unwrap();
    report
}

#[test]
fn dump_round_trips_exactly() {
    let report = small_report();
    let dir = tempfile::tempdir().unwrap();
    write_report(&report, dir.path()).unwrap();
    let back = read_dump(&dir.path().join(DUMP_FILE)).unwrap();
    assert_eq!(back, report);
    assert_eq!(to_json(&back).unwrap(), to_json(&report).unwrap());
}

#[test]
fn csv_values_round_trip_at_full_precision() {
    let report = small_report();
    let text = render_csv(&report).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let mut seen = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if &rec[2] != "ee" || &rec[0] == "TOTAL" {
            continue;
        }
        let s = report.scenario(&rec[1]).unwrap();
        let i = report.dealers.iter().position(|d| d == &rec[0]).unwrap();
        assert_eq!(rec[3].parse::<f64>().unwrap(), s.dealers[i].ee);
        seen += 1;
    }
    assert_eq!(seen, 5 * 10);
}

#[test]
fn ratio_tables_have_three_panels_and_totals() {
    let text = render_ratio_tables(&small_report());
    assert!(text.contains("Expected exposure, ratio to no-CCP"));
    assert!(text.contains("Value at risk (99%), ratio to no-CCP"));
    assert!(text.contains("Expected shortfall (99%), ratio to no-CCP"));
    assert!(text.contains("\nTotal "));
    assert!(text.contains("Total (closed form)"));
    assert!(text.starts_with("# seed: 2012\n"));
}

#[test]
fn notional_tables_round_trip_through_csv() {
    for name in ["occ-2009q1", "occ-2010q4"] {
        let table = builtin_notionals(name).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let back = NotionalTable::parse(buf.as_slice(), name).unwrap();
        assert_eq!(back, table);
    }
}

#[test]
fn extra_classes_follow_the_standard_ones() {
    let text = "# book\ndealer,bonds,credit,swaps\nA,1,2,3\n";
    let t = NotionalTable::parse(text.as_bytes(), "t").unwrap();
    assert_eq!(t.classes, vec!["swaps", "credit", "bonds"]);
    assert_eq!(t.rows[0].notionals, vec![3.0, 2.0, 1.0]);
}
