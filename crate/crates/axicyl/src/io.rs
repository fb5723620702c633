//! Run persistence: the diagnostics CSV, binary checkpoints, JSON artifacts,
//! and content digests.
//!
//! Every number is written with Rust's shortest round-trip float formatting,
//! so identical runs produce byte-identical artifacts and parsing a written
//! value recovers its bits exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::diagnostics::CsvRow;
use crate::elliptic::SolveSettings;
use crate::error::{Error, Result};
use crate::evolution::{assemble, FlowState};
use crate::field::{Parity, ScalarField};
use crate::geometry::CylinderGrid;

/// Fixed diagnostics CSV header. `format_csv_row` emits fields in exactly
/// this order; a unit test pins the correspondence.
pub const CSV_HEADER: &str = "step,t,dt,energy,dissipation_cum,u_inf,vphi_inf,vphi_d,phi_l2,\
gamma_l2,phi_V,gamma_V,X,I_abs,ratio_d,div_residual,energy_residual,\
D1,D2,D3,D4,D5,D6,D7,D8,D9,D10,D11,D12";

/// First line of every checkpoint file.
pub const CHECKPOINT_MAGIC: &str = "AXICYL1";

/// One diagnostics row in the fixed column order, without a trailing newline.
pub fn format_csv_row(row: &CsvRow) -> String {
    let mut cols: Vec<String> = vec![
        row.step.to_string(),
        row.t.to_string(),
        row.dt.to_string(),
        row.energy.to_string(),
        row.dissipation_cum.to_string(),
        row.u_inf.to_string(),
        row.vphi_inf.to_string(),
        row.vphi_d.to_string(),
        row.phi_l2.to_string(),
        row.gamma_l2.to_string(),
        row.phi_v.to_string(),
        row.gamma_v.to_string(),
        row.x.to_string(),
        row.i_abs.to_string(),
        row.ratio_d.to_string(),
        row.div_residual.to_string(),
        row.energy_residual.to_string(),
    ];
    cols.extend(row.d_constants.iter().map(|d| d.to_string()));
    cols.join(",")
}

/// Streaming writer for the diagnostics CSV.
pub struct CsvWriter {
    out: BufWriter<File>,
    rows: u64,
}

impl CsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(CSV_HEADER.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(Self { out, rows: 0 })
    }

    pub fn write_row(&mut self, row: &CsvRow) -> Result<()> {
        self.out.write_all(format_csv_row(row).as_bytes())?;
        self.out.write_all(b"\n")?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Serialize a value as pretty JSON with a trailing newline. Struct field
/// order and sorted maps make the bytes a pure function of the value.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Format(format!("json serialization failed: {e}")))?;
    bytes.push(b'\n');
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

/// Hex SHA-256 of a file's contents.
pub fn sha256_hex(path: &Path) -> Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// Persist the primary unknowns of a state. Only the swirl and the reduced
/// azimuthal vorticity are stored — every other field is derived, and
/// persisting derived data would create consistency ambiguities on restart.
///
/// Layout: a text header (magic, grid shape, cylinder dimensions, time,
/// field list), then the two arrays as row-major little-endian 64-bit IEEE
/// values in grid index order.
pub fn write_checkpoint(state: &FlowState, path: &Path) -> Result<()> {
    let grid = state.u.grid();
    let mut out = BufWriter::new(File::create(path)?);
    write!(
        out,
        "{CHECKPOINT_MAGIC}\nnr {}\nnz {}\nradius {}\nhalf_height {}\nt {}\nfields u gamma\n",
        grid.nr, grid.nz, grid.radius, grid.half_height, state.t
    )?;
    for field in [&state.u, &state.gamma] {
        for v in field.values() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn header_field<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Format("checkpoint header truncated".into()))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::Format(format!("checkpoint header: expected '{key} <value>', got '{line}'")))
}

fn parse_header_num<T: std::str::FromStr>(raw: &str, key: &str) -> Result<T> {
    raw.parse::<T>()
        .map_err(|_| Error::Format(format!("checkpoint header: unparsable {key} '{raw}'")))
}

/// Read a checkpoint and rebuild the full state: the stream function is
/// solved from scratch and the velocity and curvature fields re-derived, so
/// a resumed trajectory is exactly the one the persisted unknowns generate.
pub fn read_checkpoint(path: &Path, settings: &SolveSettings) -> Result<FlowState> {
    let bytes = std::fs::read(path)?;
    // The header is the shortest prefix containing seven '\n'-terminated
    // lines; the binary payload follows immediately.
    let mut offset = 0usize;
    let mut lines: Vec<&str> = Vec::with_capacity(7);
    for _ in 0..7 {
        let rest = &bytes[offset..];
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("checkpoint header truncated".into()))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| Error::Format("checkpoint header is not UTF-8".into()))?;
        lines.push(line);
        offset += nl + 1;
    }
    let mut it = lines.into_iter();
    let magic = it.next().unwrap_or_default();
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Format(format!(
            "bad checkpoint magic '{magic}' (expected '{CHECKPOINT_MAGIC}')"
        )));
    }
    let nr: usize = parse_header_num(header_field(it.next(), "nr")?, "nr")?;
    let nz: usize = parse_header_num(header_field(it.next(), "nz")?, "nz")?;
    let radius: f64 = parse_header_num(header_field(it.next(), "radius")?, "radius")?;
    let half_height: f64 =
        parse_header_num(header_field(it.next(), "half_height")?, "half_height")?;
    let t: f64 = parse_header_num(header_field(it.next(), "t")?, "t")?;
    let fields = header_field(it.next(), "fields")?;
    if fields != "u gamma" {
        return Err(Error::Format(format!(
            "unsupported checkpoint field list '{fields}' (expected 'u gamma')"
        )));
    }
    if !t.is_finite() {
        return Err(Error::Format(format!("non-finite checkpoint time {t}")));
    }

    let grid = CylinderGrid::build(radius, half_height, nr, nz)
        .map_err(|e| Error::Format(format!("checkpoint grid rejected: {e}")))?;
    let nodes = grid.node_count();
    let payload = &bytes[offset..];
    if payload.len() != 2 * nodes * 8 {
        return Err(Error::Format(format!(
            "checkpoint payload has {} bytes, expected {} for two {}x{} fields",
            payload.len(),
            2 * nodes * 8,
            nr + 1,
            nz + 1
        )));
    }
    let read_field = |which: usize| -> Vec<f64> {
        payload[which * nodes * 8..(which + 1) * nodes * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect()
    };
    let u = ScalarField::from_values(grid.clone(), Parity::Odd, "u", read_field(0))?;
    let gamma = ScalarField::from_values(grid, Parity::Even, "gamma", read_field(1))?;
    assemble(t, u, gamma, None, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use crate::evolution;
    use tempfile::tempdir;

    const ROUND_TRIP_TOL: f64 = 0.0; // bitwise

    #[test]
    fn csv_header_and_row_order_agree() {
        let row = CsvRow {
            step: 1001,
            t: 1002.0,
            dt: 1003.0,
            energy: 1004.0,
            dissipation_cum: 1005.0,
            u_inf: 1006.0,
            vphi_inf: 1007.0,
            vphi_d: 1008.0,
            phi_l2: 1009.0,
            gamma_l2: 1010.0,
            phi_v: 1011.0,
            gamma_v: 1012.0,
            x: 1013.0,
            i_abs: 1014.0,
            ratio_d: 1015.0,
            div_residual: 1016.0,
            energy_residual: 1017.0,
            d_constants: [
                1018.0, 1019.0, 1020.0, 1021.0, 1022.0, 1023.0, 1024.0, 1025.0, 1026.0, 1027.0,
                1028.0, 1029.0,
            ],
        };
        let header: Vec<&str> = CSV_HEADER.split(',').collect();
        let cells: Vec<String> = format_csv_row(&row).split(',').map(String::from).collect();
        assert_eq!(header.len(), 29);
        assert_eq!(cells.len(), header.len());
        for (k, cell) in cells.iter().enumerate() {
            let expected = 1001 + k as u64;
            let got: f64 = cell.parse().unwrap();
            assert_eq!(got, expected as f64, "column '{}' out of order", header[k]);
        }
    }

    #[test]
    fn float_columns_round_trip_through_display() {
        let values = [0.1, 1.0 / 3.0, 6.02e23, 5e-324, -0.0, f64::MAX];
        for v in values {
            let s = v.to_string();
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> '{s}'");
        }
    }

    fn mid_run_state() -> (FlowState, SolveSettings) {
        let cfg = SimConfig {
            nr: 16,
            nz: 16,
            t_end: 0.02,
            ..SimConfig::default()
        };
        let (state, _) = evolution::run(&cfg, &mut |_| Ok(())).unwrap();
        let grid = state.u.grid().clone();
        (state, cfg.elliptic_settings(&grid))
    }

    #[test]
    fn checkpoint_round_trip_is_bitwise_on_the_primaries() {
        let (state, settings) = mid_run_state();
        let dir = tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        write_checkpoint(&state, &path).unwrap();
        let back = read_checkpoint(&path, &settings).unwrap();
        assert_eq!(back.t.to_bits(), state.t.to_bits());
        for (a, b) in [(&back.u, &state.u), (&back.gamma, &state.gamma)] {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= ROUND_TRIP_TOL);
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        // Derived fields are reconstructed by the same cold solve the
        // stepper uses, so they agree bitwise with the pre-save cache too.
        for (a, b) in [
            (&back.psi1, &state.psi1),
            (&back.v_r, &state.v_r),
            (&back.v_z, &state.v_z),
            (&back.phi, &state.phi),
        ] {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x.to_bits(), y.to_bits(), "{}", a.label());
            }
        }
    }

    #[test]
    fn corrupted_checkpoints_are_format_errors() {
        let (state, settings) = mid_run_state();
        let dir = tempdir().unwrap();

        let path = dir.path().join("bad-magic.ckpt");
        write_checkpoint(&state, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'B';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_checkpoint(&path, &settings),
            Err(Error::Format(_))
        ));

        let path = dir.path().join("truncated.ckpt");
        write_checkpoint(&state, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(
            read_checkpoint(&path, &settings),
            Err(Error::Format(_))
        ));

        let path = dir.path().join("no-header.ckpt");
        std::fs::write(&path, b"AXICYL1\nnr 16\n").unwrap();
        assert!(matches!(
            read_checkpoint(&path, &settings),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn digests_reflect_content_not_identity() {
        let dir = tempdir().unwrap();
        let a = dir.path().join("a.txt");
        let b = dir.path().join("b.txt");
        std::fs::write(&a, b"payload").unwrap();
        std::fs::write(&b, b"payload").unwrap();
        assert_eq!(sha256_hex(&a).unwrap(), sha256_hex(&b).unwrap());
        std::fs::write(&b, b"payload!").unwrap();
        assert_ne!(sha256_hex(&a).unwrap(), sha256_hex(&b).unwrap());
    }

    #[test]
    fn json_artifacts_are_deterministic() {
        #[derive(Serialize)]
        struct Doc {
            name: &'static str,
            value: f64,
        }
        let dir = tempdir().unwrap();
        let p1 = dir.path().join("one.json");
        let p2 = dir.path().join("two.json");
        let doc = Doc {
            name: "x",
            value: 0.1,
        };
        write_json(&p1, &doc).unwrap();
        write_json(&p2, &doc).unwrap();
        assert_eq!(sha256_hex(&p1).unwrap(), sha256_hex(&p2).unwrap());
    }
}
