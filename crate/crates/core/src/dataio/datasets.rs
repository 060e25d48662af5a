//! Built-in reference data (billions USD).

use super::notionals::{NotionalRow, NotionalTable};

/// Column order of the OCC dealer tables.
pub const OCC_CLASSES: [&str; 4] = ["forwards", "options", "swaps", "credit"];

pub const BUILTIN_NOTIONALS: [&str; 2] = ["occ-2009q1", "occ-2010q4"];

/// Ten largest US derivatives dealers, March 31, 2009 (OCC).
const OCC_2009Q1: [(&str, [f64; 4]); 10] = [
    ("JP Morgan Chase", [8_422.0, 10_633.0, 51_221.0, 7_495.0]),
    ("Bank of America", [9_132.0, 6_908.0, 50_702.0, 5_649.0]),
    ("Goldman Sachs", [1_631.0, 6_754.0, 30_958.0, 6_601.0]),
    ("Morgan Stanley", [1_127.0, 3_530.0, 26_112.0, 6_307.0]),
    ("Citigroup", [4_743.0, 5_868.0, 15_199.0, 2_950.0]),
    ("Wells Fargo", [1_217.0, 543.0, 2_748.0, 286.0]),
    ("HSBC", [595.0, 185.0, 1_565.0, 913.0]),
    ("Taunus", [667.0, 20.0, 162.0, 144.0]),
    ("Bank of New York", [371.0, 304.0, 404.0, 1.0]),
    ("State Street", [571.0, 45.0, 24.0, 0.0]),
];

/// Ten largest US derivatives dealers, December 31, 2010 (OCC).
const OCC_2010Q4: [(&str, [f64; 4]); 10] = [
    ("JP Morgan Chase", [11_807.0, 8_899.0, 49_332.0, 5_472.0]),
    ("Bank of America", [10_287.0, 5_848.0, 43_482.0, 4_367.0]),
    ("Citigroup", [6_895.0, 7_071.0, 28_639.0, 2_546.0]),
    ("Goldman Sachs", [3_805.0, 8_568.0, 27_392.0, 4_233.0]),
    ("Morgan Stanley", [5_459.0, 3_855.0, 27_162.0, 4_648.0]),
    ("Wells Fargo", [1_081.0, 463.0, 1_806.0, 93.0]),
    ("HSBC", [758.0, 127.0, 1_901.0, 700.0]),
    ("Bank of New York", [420.0, 367.0, 555.0, 1.0]),
    ("Taunus", [848.0, 21.0, 199.0, 33.0]),
    ("State Street", [599.0, 76.0, 79.0, 0.0]),
];

/// Gross credit exposures by asset class, June 2010 (BIS).
const BIS_2010H1: [(&str, f64); 6] = [
    ("commodity", 457.0),
    ("equity", 706.0),
    ("fx", 2_524.0),
    ("interest_rate", 17_533.0),
    ("credit", 1_666.0),
    ("other", 1_788.0),
];

pub fn builtin_notionals(name: &str) -> Option<NotionalTable> {
    let rows = match name {
        "occ-2009q1" => &OCC_2009Q1,
        "occ-2010q4" => &OCC_2010Q4,
        _ => return None,
    };
    Some(NotionalTable {
        source: name.to_string(),
        classes: OCC_CLASSES.iter().map(|c| c.to_string()).collect(),
        rows: rows
            .iter()
            .map(|(dealer, z)| NotionalRow {
                dealer: dealer.to_string(),
                notionals: z.to_vec(),
            })
            .collect(),
    })
}

/// Named credit-exposure vector: `(class names, exposures)`.
pub fn builtin_credit_exposures(name: &str) -> Option<(Vec<String>, Vec<f64>)> {
    match name {
        "bis-2010h1" => Some((
            BIS_2010H1.iter().map(|(n, _)| n.to_string()).collect(),
            BIS_2010H1.iter().map(|(_, v)| *v).collect(),
        )),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occ_2009_golden() {
        let t = builtin_notionals("occ-2009q1").unwrap();
        assert_eq!(t.classes, OCC_CLASSES);
        assert_eq!(t.rows.len(), 10);
        assert_eq!(t.rows[0].dealer, "JP Morgan Chase");
        assert_eq!(t.rows[0].notionals, vec![8_422.0, 10_633.0, 51_221.0, 7_495.0]);
        let totals: Vec<f64> = (0..4).map(|k| t.rows.iter().map(|r| r.notionals[k]).sum()).collect();
        // The published total row differs from the column sums by rounding.
        assert_eq!(totals, vec![28_476.0, 34_790.0, 179_095.0, 30_346.0]);
        assert_eq!(t.rows[9].notionals[3], 0.0);
    }

    #[test]
    fn occ_2010_golden() {
        let t = builtin_notionals("occ-2010q4").unwrap();
        assert_eq!(t.rows[0].notionals, vec![11_807.0, 8_899.0, 49_332.0, 5_472.0]);
        let totals: Vec<f64> = (0..4).map(|k| t.rows.iter().map(|r| r.notionals[k]).sum()).collect();
        assert_eq!(totals, vec![41_959.0, 35_295.0, 180_547.0, 22_093.0]);
    }

    #[test]
    fn bis_golden() {
        let (names, ce) = builtin_credit_exposures("bis-2010h1").unwrap();
        assert_eq!(names[4], "credit");
        assert_eq!(ce.iter().sum::<f64>(), 24_674.0);
        assert!(builtin_credit_exposures("nope").is_none());
    }
}
