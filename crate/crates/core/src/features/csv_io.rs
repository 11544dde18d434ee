//! Feature matrix CSV: header `subject_id,label,f01,...,f24`, one row per
//! recording in cohort order, values with 9 significant digits.

use std::io::{Read, Write};

use thiserror::Error;

use super::{FeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::signal_io::Label;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad header: expected subject_id,label,f01..f24")]
    BadHeader,
    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },
}

/// `printf("%.{sig}g")`-style formatting.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_feature_csv<W: Write>(w: W, rows: &[FeatureVector]) -> Result<(), CsvError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["subject_id", "label"];
    header.extend(FEATURE_NAMES);
    out.write_record(&header)?;
    for row in rows {
        let mut rec = Vec::with_capacity(N_FEATURES + 2);
        rec.push(row.subject_id.clone());
        rec.push(row.label.as_u8().to_string());
        rec.extend(row.values.iter().map(|v| format_sig(*v, 9)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(r: R) -> Result<Vec<FeatureVector>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    let expected: Vec<&str> = ["subject_id", "label"].into_iter().chain(FEATURE_NAMES).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(CsvError::BadHeader);
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |reason: String| CsvError::BadRow { row, reason };
        if rec.len() != N_FEATURES + 2 {
            return Err(bad(format!("{} fields", rec.len())));
        }
        let label = rec[1]
            .parse::<u8>()
            .ok()
            .and_then(Label::from_u8)
            .ok_or_else(|| bad(format!("label {:?}", &rec[1])))?;
        let mut values = [0.0; N_FEATURES];
        for (k, v) in values.iter_mut().enumerate() {
            *v = rec[k + 2]
                .parse()
                .map_err(|_| bad(format!("{} = {:?}", FEATURE_NAMES[k], &rec[k + 2])))?;
        }
        rows.push(FeatureVector {
            subject_id: rec[0].to_string(),
            label,
            values,
        });
    }
    Ok(rows)
}
