use serde::Deserialize;
use serde_json::Value;
use thinmix_core::io::{format_sig12, pmf_to_csv, pmf_to_json, round_json};
use thinmix_core::limits::ConvergenceReport;
use thinmix_core::{FinitePmf, TailReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// What a command produces.
pub enum Output {
    Pmf { pmf: FinitePmf, tail: Option<TailReport> },
    Report(ConvergenceReport),
    /// A flat JSON object.
    Record(Value),
}

impl Output {
    pub fn pmf(pmf: FinitePmf) -> Self {
        Output::Pmf { pmf, tail: None }
    }

    pub fn record<T: serde::Serialize>(value: &T) -> Self {
        Output::Record(serde_json::to_value(value).expect("serializable output"))
    }

    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Output::Pmf { pmf, tail: None }, Format::Json) => pmf_to_json(pmf) + "\n",
            (Output::Pmf { pmf, tail: Some(t) }, Format::Json) => {
                let mut v = serde_json::json!({ "pmf": pmf.probs(), "tail": t });
                round_json(&mut v);
                v.to_string() + "\n"
            }
            (Output::Pmf { pmf, tail }, Format::Csv) => {
                let header = tail
                    .map(|t| format!("# truncation_point={},tail_mass={}\n", t.truncation_point, format_sig12(t.tail_mass)))
                    .unwrap_or_default();
                header + &pmf_to_csv(pmf)
            }
            (Output::Pmf { pmf, tail }, Format::Table) => {
                let mut out = format!("{:>6}  {}\n", "k", "p");
                for (k, p) in pmf.probs().iter().enumerate() {
                    out += &format!("{k:>6}  {}\n", format_sig12(*p));
                }
                if let Some(t) = tail {
                    out += &format!("tail mass beyond {}: {}\n", t.truncation_point, format_sig12(t.tail_mass));
                }
                out
            }
            (Output::Report(r), Format::Json) => r.to_json() + "\n",
            (Output::Report(r), Format::Csv) => r.to_csv(),
            (Output::Report(r), Format::Table) => report_table(r),
            (Output::Record(v), format) => {
                let mut v = v.clone();
                round_json(&mut v);
                match format {
                    Format::Json => serde_json::to_string_pretty(&v).expect("json") + "\n",
                    Format::Csv => record_rows(&v).map(|(k, x)| format!("{k},{}\n", csv_field(&x))).collect(),
                    Format::Table => {
                        let width = record_rows(&v).map(|(k, _)| k.len()).max().unwrap_or(0);
                        record_rows(&v).map(|(k, x)| format!("{k:<width$}  {x}\n")).collect()
                    }
                }
            }
        }
    }
}

fn record_rows(v: &Value) -> impl Iterator<Item = (String, String)> + '_ {
    let fields: Vec<(String, String)> = match v {
        Value::Object(o) => o.iter().map(|(k, x)| (k.clone(), scalar(x))).collect(),
        other => vec![("value".into(), scalar(other))],
    };
    fields.into_iter()
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn report_table(r: &ConvergenceReport) -> String {
    let mut out = format!("limit: {}\n", r.limit);
    out += &format!("{:>8}  {:>20}  {:>20}  {:>20}\n", "n", "alpha", "tv", "tail");
    for p in &r.points {
        let n = p.n.map(|n| n.to_string()).unwrap_or_default();
        let a = p.alpha.map(format_sig12).unwrap_or_default();
        out += &format!("{n:>8}  {a:>20}  {:>20}  {:>20}\n", format_sig12(p.tv), format_sig12(p.tail));
    }
    out += &format!("monotone tail: {}\n", r.monotone_tail);
    if let Some(g) = r.max_commutation_gap {
        out += &format!("max commutation gap: {}\n", format_sig12(g));
    }
    out
}
