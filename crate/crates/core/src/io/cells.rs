//! Cell instance CSV.
//!
//! Header is exactly `cell_id,heat_kwh_a,peak_kw,street_m,has_dh`, optionally
//! followed by `,lon,lat`. `has_dh` is `0` or `1`. Peak loads are rounded to
//! whole kW on load. Row numbers in errors are file line numbers (the header
//! is line 1).

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::CellRecord;

pub const CELL_HEADER: [&str; 5] = ["cell_id", "heat_kwh_a", "peak_kw", "street_m", "has_dh"];
pub const CENTROID_HEADER: [&str; 2] = ["lon", "lat"];

pub fn load_cells(path: impl AsRef<Path>) -> Result<Vec<CellRecord>> {
    read_cells(File::open(path)?)
}

fn parse_number(row: usize, column: &str, raw: &str) -> Result<f64> {
    let value: f64 = raw.trim().parse().map_err(|_| Error::Row {
        row,
        reason: format!("{column}: `{raw}` is not a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::Row {
            row,
            reason: format!("{column}: `{raw}` is not finite"),
        });
    }
    Ok(value)
}

pub fn read_cells(reader: impl Read) -> Result<Vec<CellRecord>> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();
    let with_centroid = if header == CELL_HEADER {
        false
    } else if header.len() == 7 && header[..5] == CELL_HEADER && header[5..] == CENTROID_HEADER {
        true
    } else {
        return Err(Error::Row {
            row: 1,
            reason: format!(
                "header must be `{}` optionally followed by `,lon,lat`, found `{}`",
                CELL_HEADER.join(","),
                header.join(",")
            ),
        });
    };

    let mut cells = Vec::new();
    let mut rows_by_id: HashMap<String, usize> = HashMap::new();
    for record in csv.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let field = |k: usize| record.get(k).unwrap_or("");
        let id = field(0).to_owned();
        if id.is_empty() {
            return Err(Error::Row {
                row,
                reason: "empty cell_id".into(),
            });
        }
        let mut numbers = [0.0; 3];
        for (k, slot) in numbers.iter_mut().enumerate() {
            let value = parse_number(row, CELL_HEADER[k + 1], field(k + 1))?;
            if value < 0.0 {
                return Err(Error::Row {
                    row,
                    reason: format!("{} is negative ({value})", CELL_HEADER[k + 1]),
                });
            }
            *slot = value;
        }
        let has_dh = match field(4).trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Row {
                    row,
                    reason: format!("has_dh must be 0 or 1, found `{other}`"),
                })
            }
        };
        let mut cell = CellRecord::new(id.clone(), numbers[0], numbers[1].round(), numbers[2], has_dh);
        if with_centroid {
            cell.centroid = Some((parse_number(row, "lon", field(5))?, parse_number(row, "lat", field(6))?));
        }
        cell.validate().map_err(|e| Error::Row {
            row,
            reason: e.to_string(),
        })?;
        if let Some(first) = rows_by_id.insert(id.clone(), row) {
            return Err(Error::DuplicateCell { id, first, second: row });
        }
        cells.push(cell);
    }
    Ok(cells)
}

/// Writes cells in the same schema; floats use shortest round-trip
/// formatting so reading back is lossless.
pub fn write_cells(cells: &[CellRecord], writer: impl Write) -> Result<()> {
    let with_centroid = cells.first().is_some_and(|c| c.centroid.is_some());
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = CELL_HEADER.to_vec();
    if with_centroid {
        header.extend(CENTROID_HEADER);
    }
    csv.write_record(&header)?;
    for cell in cells {
        let mut row = vec![
            cell.id.clone(),
            cell.heat_kwh_a.to_string(),
            cell.peak_kw.to_string(),
            cell.street_m.to_string(),
            u8::from(cell.has_district_heating).to_string(),
        ];
        match (with_centroid, cell.centroid) {
            (true, Some((lon, lat))) => row.extend([lon.to_string(), lat.to_string()]),
            (false, None) => {}
            _ => {
                return Err(Error::Invalid(format!(
                    "cell `{}`: either all cells or none must have centroids",
                    cell.id
                )))
            }
        }
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn cells_to_string(cells: &[CellRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_cells(cells, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<Vec<CellRecord>> {
        read_cells(s.as_bytes())
    }

    #[test]
    fn well_formed() {
        let cells =
            read("cell_id,heat_kwh_a,peak_kw,street_m,has_dh\na,1000000,500,1000,0\nb,0,0,0,1\nc,2e5,99.6,10,0\n")
                .unwrap();
        assert_eq!(cells.len(), 3);
        assert_eq!(cells[0], CellRecord::new("a", 1e6, 500.0, 1000.0, false));
        assert!(cells[1].has_district_heating);
        assert_eq!(cells[2].peak_kw, 100.0);
    }

    #[test]
    fn with_centroids() {
        let cells = read("cell_id,heat_kwh_a,peak_kw,street_m,has_dh,lon,lat\na,1,1,1,0,9.99,53.55\n").unwrap();
        assert_eq!(cells[0].centroid, Some((9.99, 53.55)));
    }

    #[test]
    fn duplicate_names_both_rows() {
        let err = read("cell_id,heat_kwh_a,peak_kw,street_m,has_dh\na,1,1,1,0\nb,1,1,1,0\na,1,1,1,0\n").unwrap_err();
        match err {
            Error::DuplicateCell { id, first, second } => assert_eq!((id.as_str(), first, second), ("a", 2, 4)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn bad_flag() {
        let err = read("cell_id,heat_kwh_a,peak_kw,street_m,has_dh\na,1,1,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err}");
        assert!(err.to_string().contains("has_dh"));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            read("id,heat,peak,street,dh\n"),
            Err(Error::Row { row: 1, .. })
        ));
        let neg = read("cell_id,heat_kwh_a,peak_kw,street_m,has_dh\na,1,1,-5,0\n").unwrap_err();
        assert!(
            neg.to_string().contains("line 2") && neg.to_string().contains("street_m"),
            "{neg}"
        );
        let nan = read("cell_id,heat_kwh_a,peak_kw,street_m,has_dh\na,NaN,1,5,0\n").unwrap_err();
        assert!(nan.to_string().contains("not finite"));
        let text = read("cell_id,heat_kwh_a,peak_kw,street_m,has_dh\na,x,1,5,0\n").unwrap_err();
        assert!(text.to_string().contains("not a number"));
        // Heat without peak load.
        assert!(read("cell_id,heat_kwh_a,peak_kw,street_m,has_dh\na,100,0.2,5,0\n").is_err());
    }

    #[test]
    fn round_trip() {
        let cells = vec![
            CellRecord::new("x", 123456.789, 61.0, 0.1, false).with_centroid(10.0123456789, 53.5),
            CellRecord::new("y", 0.0, 0.0, 42.0, true).with_centroid(-0.5, 1e-3),
        ];
        let text = cells_to_string(&cells).unwrap();
        assert_eq!(read(&text).unwrap(), cells);
    }
}
