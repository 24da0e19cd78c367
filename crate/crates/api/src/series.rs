//! Plot-ready tables derived from results, written as CSV.

use quadratik_core::gof::QqSeries;
use quadratik_core::stats::SummaryTable;
use quadratik_core::DataMatrix;

use crate::response::Output;

#[derive(Debug, Clone, PartialEq)]
pub struct AuxTable {
    /// File stem, e.g. `summary` for `summary.csv`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl AuxTable {
    fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Shortest representation that parses back to the same value.
pub fn num(v: f64) -> String {
    serde_json::to_string(&v).expect("finite number")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn summary_table(t: &SummaryTable) -> AuxTable {
    let mut out = AuxTable::new("summary", &["group", "n", "variable", "mean", "sd", "median", "iqr", "min", "max"]);
    for g in std::iter::once(&t.overall).chain(&t.groups) {
        let group = g.group.map(|v| v.to_string()).unwrap_or_else(|| "overall".into());
        for (j, v) in g.variables.iter().enumerate() {
            out.rows.push(vec![
                group.clone(),
                g.n.to_string(),
                (j + 1).to_string(),
                num(v.mean),
                num(v.sd),
                num(v.median),
                num(v.iqr),
                num(v.min),
                num(v.max),
            ]);
        }
    }
    out
}

fn qq_table(qq: &[QqSeries]) -> AuxTable {
    let mut out = AuxTable::new("qq", &["variable", "reference", "sample"]);
    for s in qq {
        for (x, y) in s.x.iter().zip(&s.y) {
            out.rows.push(vec![(s.variable + 1).to_string(), num(*x), num(*y)]);
        }
    }
    out
}

fn coordinate_table(c: &DataMatrix, memberships: &[usize], truth: Option<&[i64]>) -> AuxTable {
    let mut header: Vec<String> = ["x", "y", "z"].iter().take(c.d()).map(|s| s.to_string()).collect();
    header.push("membership".into());
    if truth.is_some() {
        header.push("label".into());
    }
    let mut out = AuxTable { name: "sphere_coordinates".into(), header, rows: Vec::new() };
    for (i, row) in c.rows().enumerate() {
        let mut r: Vec<String> = row.iter().map(|v| num(*v)).collect();
        r.push(memberships[i].to_string());
        if let Some(t) = truth {
            r.push(t[i].to_string());
        }
        out.rows.push(r);
    }
    out
}

fn elbow_table(points: &[quadratik_core::clustering::ElbowPoint]) -> AuxTable {
    let mut out = AuxTable::new("elbow", &["k", "wcss_euclidean", "wcss_cosine"]);
    for e in points {
        out.rows.push(vec![e.k.to_string(), num(e.wcss_euclidean), num(e.wcss_cosine)]);
    }
    out
}

fn igp_table(rows: impl Iterator<Item = (usize, Vec<Option<f64>>)>) -> AuxTable {
    let mut out = AuxTable::new("igp", &["k", "cluster", "igp"]);
    for (k, igp) in rows {
        for (c, v) in igp.iter().enumerate() {
            out.rows.push(vec![k.to_string(), (c + 1).to_string(), opt(*v)]);
        }
    }
    out
}

/// Auxiliary tables for a result; empty when there is nothing to plot.
pub fn aux_tables(out: &Output) -> Vec<AuxTable> {
    match out {
        Output::Test(r) => {
            let mut v = vec![summary_table(&r.summary.table)];
            if !r.summary.qq.is_empty() {
                v.push(qq_table(&r.summary.qq));
            }
            v
        }
        Output::Uniformity(r) => vec![summary_table(&r.summary)],
        Output::Tuning(r) => {
            let mut t = AuxTable::new("power_curve", &["delta", "h", "power", "rejections", "runs"]);
            for p in &r.curve.rows {
                t.rows.push(vec![num(p.delta), num(p.h), num(p.power), p.rejections.to_string(), p.runs.to_string()]);
            }
            vec![t]
        }
        Output::Sample(r) => {
            let mut t = AuxTable::new("samples", &[]);
            t.header = (1..=r.samples.d()).map(|j| format!("x{j}")).collect();
            t.rows = r.samples.rows().map(|row| row.iter().map(|v| num(*v)).collect()).collect();
            vec![t]
        }
        Output::Density(r) => {
            let mut t = AuxTable::new("density", &["row", "density"]);
            t.rows = r.densities.iter().enumerate().map(|(i, d)| vec![(i + 1).to_string(), num(*d)]).collect();
            vec![t]
        }
        Output::Clustering(r) => {
            let mut memberships = AuxTable::new("memberships", &["row"]);
            memberships.header.extend(r.fits.iter().map(|f| format!("k{}", f.k)));
            for i in 0..r.coordinates.n() {
                let mut row = vec![(i + 1).to_string()];
                row.extend(r.fits.iter().map(|f| f.final_memberships[i].to_string()));
                memberships.rows.push(row);
            }
            let mut metrics = AuxTable::new("metrics", &["k", "log_lik", "ari", "macro_precision", "macro_recall"]);
            for (f, m) in r.fits.iter().zip(&r.metrics) {
                metrics.rows.push(vec![
                    f.k.to_string(),
                    num(f.log_lik),
                    opt(m.ari),
                    opt(m.macro_precision),
                    opt(m.macro_recall),
                ]);
            }
            vec![
                elbow_table(&r.elbow),
                memberships,
                metrics,
                igp_table(r.metrics.iter().map(|m| (m.k, m.igp.clone()))),
            ]
        }
        Output::Validation(r) => {
            let mut metrics = AuxTable::new(
                "validation",
                &["k", "statistic", "critical_value", "reject", "ari", "macro_precision", "macro_recall"],
            );
            for row in &r.rows {
                let (s, c, rej) = match &row.test {
                    Some(t) => (num(t.statistics[1]), num(t.critical_values[1]), t.reject[1].to_string()),
                    None => Default::default(),
                };
                metrics.rows.push(vec![
                    row.k.to_string(),
                    s,
                    c,
                    rej,
                    opt(row.ari),
                    opt(row.macro_precision),
                    opt(row.macro_recall),
                ]);
            }
            vec![elbow_table(&r.elbow), metrics, igp_table(r.rows.iter().map(|row| (row.k, row.igp.clone())))]
        }
        Output::Summary(r) => vec![
            summary_table(&r.table),
            coordinate_table(&r.coordinates, &r.memberships, r.true_labels.as_deref()),
        ],
    }
}
