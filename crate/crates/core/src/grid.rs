//! Rectangular chart grids and sampled fields with CSV and JSON export.

use serde::Serialize;
use serde_json::value::RawValue;

use crate::format::{json_num, sci};
use crate::surface::Surface;

/// Sample positions along both chart axes.
///
/// Closed axes include both endpoints; periodic axes drop the duplicate
/// seam point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub periodic_u: bool,
    pub periodic_v: bool,
}

impl GridSpec {
    pub fn for_surface(surface: &Surface, nu: usize, nv: usize) -> GridSpec {
        GridSpec {
            nu,
            nv,
            u_range: surface.u_range(),
            v_range: surface.v_range(),
            periodic_u: surface.periodic_u(),
            periodic_v: surface.periodic_v(),
        }
    }

    fn axis_step(n: usize, range: (f64, f64), periodic: bool) -> f64 {
        let len = range.1 - range.0;
        if periodic {
            len / n as f64
        } else {
            len / (n.max(2) - 1) as f64
        }
    }

    pub fn du(&self) -> f64 {
        Self::axis_step(self.nu, self.u_range, self.periodic_u)
    }

    pub fn dv(&self) -> f64 {
        Self::axis_step(self.nv, self.v_range, self.periodic_v)
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u_range.0 + i as f64 * self.du()
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v_range.0 + j as f64 * self.dv()
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `(i, j)`: `u` is the slow axis.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    /// All `(u, v)` sample points in row-major order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.nu {
            for j in 0..self.nv {
                out.push((self.u(i), self.v(j)));
            }
        }
        out
    }
}

/// Named real channels sampled at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: GridSpec,
    pub channels: Vec<String>,
    /// One row of channel values per grid point, row-major.
    pub data: Vec<Vec<f64>>,
}

/// Serializable view of a `GridField`; numbers keep their fixed format.
#[derive(Debug, Serialize)]
pub struct JsonGrid<'a> {
    shape: [usize; 2],
    periodic: [bool; 2],
    u: Vec<Box<RawValue>>,
    v: Vec<Box<RawValue>>,
    channels: &'a [String],
    values: Vec<Vec<Box<RawValue>>>,
}

impl GridField {
    pub fn new(grid: GridSpec, channels: Vec<String>, data: Vec<Vec<f64>>) -> GridField {
        debug_assert_eq!(data.len(), grid.len());
        GridField { grid, channels, data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn value(&self, i: usize, j: usize, channel: usize) -> f64 {
        self.data[self.grid.index(i, j)][channel]
    }

    /// One channel over the whole grid, row-major.
    pub fn channel(&self, channel: usize) -> Vec<f64> {
        self.data.iter().map(|row| row[channel]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v");
        for c in &self.channels {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (k, (u, v)) in self.grid.points().into_iter().enumerate() {
            out.push_str(&sci(u));
            out.push(',');
            out.push_str(&sci(v));
            for x in &self.data[k] {
                out.push(',');
                out.push_str(&sci(*x));
            }
            out.push('\n');
        }
        out
    }

    /// JSON view with shape metadata; `values[c]` is channel `c`
    /// flattened row-major.
    pub fn to_json(&self) -> JsonGrid<'_> {
        JsonGrid {
            shape: [self.grid.nu, self.grid.nv],
            periodic: [self.grid.periodic_u, self.grid.periodic_v],
            u: (0..self.grid.nu).map(|i| json_num(self.grid.u(i))).collect(),
            v: (0..self.grid.nv).map(|j| json_num(self.grid.v(j))).collect(),
            channels: &self.channels,
            values: (0..self.channels.len())
                .map(|c| self.data.iter().map(|row| json_num(row[c])).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(periodic: bool) -> GridSpec {
        GridSpec { nu: 4, nv: 3, u_range: (0.0, 1.0), v_range: (0.0, 2.0), periodic_u: periodic, periodic_v: false }
    }

    #[test]
    fn endpoints_and_seams() {
        let closed = layout(false);
        assert_eq!(closed.u(3), 1.0);
        assert_eq!(closed.v(2), 2.0);
        let periodic = layout(true);
        assert_eq!(periodic.u(3), 0.75);
        assert_eq!(periodic.points().len(), 12);
        assert_eq!(periodic.points()[periodic.index(1, 2)], (0.25, 2.0));
    }

    #[test]
    fn csv_layout() {
        let g = layout(false);
        let data = (0..12).map(|k| vec![k as f64]).collect();
        let field = GridField::new(g, vec!["M".into()], data);
        let csv = field.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "u,v,M");
        assert_eq!(lines.len(), 13);
        assert_eq!(lines[2], "0.000000000000e+00,1.000000000000e+00,1.000000000000e+00");
        let text = serde_json::to_string(&field.to_json()).unwrap();
        assert!(text.starts_with(r#"{"shape":[4,3],"periodic":[false,false],"u":[0.000000000000e+00,"#));
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(json["values"][0].as_array().unwrap().len(), 12);
    }
}
