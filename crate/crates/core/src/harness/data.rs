use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Curve, Grid, GridRef};
use crate::scalar::Scalar;

/// Monthly observations with strictly consecutive (year, month) stamps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarSeries {
    pub stamps: Vec<(i32, u32)>,
    pub values: Vec<f64>,
}

impl ScalarSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_year(&self) -> Option<i32> {
        self.stamps.first().map(|s| s.0)
    }

    /// The twelve values of `year`, if the whole year is present.
    pub fn year(&self, year: i32) -> Option<&[f64]> {
        let i = self.stamps.iter().position(|&s| s == (year, 1))?;
        (i + 12 <= self.len()).then(|| &self.values[i..i + 12])
    }

    /// Calendar years covered completely, in order.
    pub fn whole_years(&self) -> Vec<i32> {
        let mut out = Vec::new();
        for (i, &(y, m)) in self.stamps.iter().enumerate() {
            if m == 1 && i + 12 <= self.len() {
                out.push(y);
            }
        }
        out
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    year: String,
    month: String,
    value: String,
}

fn next_month((y, m): (i32, u32)) -> (i32, u32) {
    if m == 12 {
        (y + 1, 1)
    } else {
        (y, m + 1)
    }
}

/// Reads a `year,month,value` CSV. Row numbers in errors count the header as row 1.
pub fn ingest_monthly_csv(path: impl AsRef<Path>) -> Result<ScalarSeries> {
    let file = std::fs::File::open(path.as_ref())?;
    ingest_monthly_reader(file)
}

pub fn ingest_monthly_reader<R: std::io::Read>(reader: R) -> Result<ScalarSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["year", "month", "value"] {
        return Err(Error::Data { row: 1, message: format!("expected header `year,month,value`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")) });
    }
    let mut series = ScalarSeries { stamps: Vec::new(), values: Vec::new() };
    for (i, rec) in rdr.deserialize::<Row>().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Data { row, message: e.to_string() })?;
        let year: i32 = rec.year.parse().map_err(|_| Error::Data { row, message: format!("bad year `{}`", rec.year) })?;
        let month: u32 = rec.month.parse().map_err(|_| Error::Data { row, message: format!("bad month `{}`", rec.month) })?;
        if !(1..=12).contains(&month) {
            return Err(Error::Data { row, message: format!("month {month} out of range") });
        }
        let value: f64 = rec.value.parse().map_err(|_| Error::Data { row, message: format!("bad value `{}`", rec.value) })?;
        if !value.is_finite() {
            return Err(Error::Data { row, message: "non-finite value".into() });
        }
        if let Some(&last) = series.stamps.last() {
            let want = next_month(last);
            if (year, month) == last || (year, month) < last {
                return Err(Error::Data { row, message: format!("duplicate or out-of-order month {year}-{month:02}") });
            }
            if (year, month) != want {
                return Err(Error::Data { row, message: format!("gap: expected {}-{:02}, found {year}-{month:02}", want.0, want.1) });
            }
        }
        series.stamps.push((year, month));
        series.values.push(value);
    }
    Ok(series)
}

/// Evaluation position of month `j` (0-based) within its year.
pub fn month_position(j: usize) -> f64 {
    j as f64 / 11.0
}

/// The 12-point grid of month positions.
pub fn month_grid<T: Scalar>() -> GridRef<T> {
    Grid::from_points((0..12).map(|j| T::of(month_position(j))).collect()).expect("valid month grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Smoothing {
    /// Raw monthly values on the 12-point grid.
    None,
    /// Cubic B-spline fit with a second-derivative roughness penalty.
    Spline { penalty: f64 },
}

/// Cubic B-spline basis on `[0,1]` with clamped knots.
#[derive(Debug, Clone)]
pub struct SplineBasis {
    knots: Vec<f64>,
}

const DEGREE: usize = 3;

impl Default for SplineBasis {
    /// Dimension 8, interior knots at 0.2, 0.4, 0.6, 0.8.
    fn default() -> Self {
        SplineBasis::new(&[0.2, 0.4, 0.6, 0.8]).expect("valid knots")
    }
}

impl SplineBasis {
    pub fn new(interior: &[f64]) -> Result<Self> {
        if interior.windows(2).any(|w| w[1] <= w[0]) || interior.iter().any(|&k| !(k > 0.0 && k < 1.0)) {
            return Err(Error::InvalidInput("interior knots must increase strictly inside (0,1)".into()));
        }
        let mut knots = vec![0.0; DEGREE + 1];
        knots.extend_from_slice(interior);
        knots.extend(std::iter::repeat_n(1.0, DEGREE + 1));
        Ok(SplineBasis { knots })
    }

    pub fn dim(&self) -> usize {
        self.knots.len() - DEGREE - 1
    }

    fn order0(&self, i: usize, x: f64) -> f64 {
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let last = *self.knots.last().unwrap();
        if (a <= x && x < b) || (x == last && b == last && a < b) {
            1.0
        } else {
            0.0
        }
    }

    /// `d`-th derivative of basis function `i` of degree `p` at `x`.
    fn eval(&self, i: usize, p: usize, d: usize, x: f64) -> f64 {
        let t = &self.knots;
        let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
        if p == 0 {
            return if d == 0 { self.order0(i, x) } else { 0.0 };
        }
        if d > 0 {
            let pf = p as f64;
            return pf
                * (ratio(self.eval(i, p - 1, d - 1, x), t[i + p] - t[i])
                    - ratio(self.eval(i + 1, p - 1, d - 1, x), t[i + p + 1] - t[i + 1]));
        }
        ratio(x - t[i], t[i + p] - t[i]) * self.eval(i, p - 1, 0, x)
            + ratio(t[i + p + 1] - x, t[i + p + 1] - t[i + 1]) * self.eval(i + 1, p - 1, 0, x)
    }

    pub fn value(&self, i: usize, x: f64) -> f64 {
        self.eval(i, DEGREE, 0, x)
    }

    pub fn second_derivative(&self, i: usize, x: f64) -> f64 {
        self.eval(i, DEGREE, 2, x)
    }

    /// `R_ab = int B_a'' B_b''`; exact (Simpson on each knot span, integrand quadratic there).
    pub fn roughness(&self) -> Vec<f64> {
        let n = self.dim();
        let mut r = vec![0.0; n * n];
        for w in self.knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            // evaluate just inside the span so the half-open convention picks this piece
            let pts = [a, 0.5 * (a + b), b];
            let vals: Vec<Vec<f64>> = pts
                .iter()
                .map(|&x| {
                    let x = x.clamp(a + 1e-12 * (b - a), b - 1e-12 * (b - a));
                    (0..n).map(|i| self.second_derivative(i, x)).collect()
                })
                .collect();
            let h = b - a;
            for i in 0..n {
                for j in 0..n {
                    r[i * n + j] += h / 6.0 * (vals[0][i] * vals[0][j] + 4.0 * vals[1][i] * vals[1][j] + vals[2][i] * vals[2][j]);
                }
            }
        }
        r
    }

    /// Penalized least-squares coefficients for observations `y` at `xs`.
    pub fn fit(&self, xs: &[f64], y: &[f64], penalty: f64) -> Result<Vec<f64>> {
        if xs.len() != y.len() {
            return Err(Error::InvalidInput("positions and values differ in length".into()));
        }
        if !(penalty >= 0.0 && penalty.is_finite()) {
            return Err(Error::InvalidInput(format!("penalty must be nonnegative, got {penalty}")));
        }
        let n = self.dim();
        let design: Vec<Vec<f64>> = xs.iter().map(|&x| (0..n).map(|i| self.value(i, x)).collect()).collect();
        let mut a = self.roughness();
        a.iter_mut().for_each(|v| *v *= penalty);
        let mut rhs = vec![0.0; n];
        for (row, &yy) in design.iter().zip(y) {
            for i in 0..n {
                rhs[i] += row[i] * yy;
                for j in 0..n {
                    a[i * n + j] += row[i] * row[j];
                }
            }
        }
        cholesky_solve(n, a, rhs)
    }

    pub fn evaluate(&self, coef: &[f64], x: f64) -> f64 {
        coef.iter().enumerate().map(|(i, c)| c * self.value(i, x)).sum()
    }
}

fn cholesky_solve(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::InvalidInput("smoothing system is singular".into()));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i * n + k] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            b[i] -= a[k * n + i] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    Ok(b)
}

/// One curve per whole year of `years`, on the month grid (no smoothing) or on `grid`.
pub fn series_to_curves<T: Scalar>(
    series: &ScalarSeries,
    years: &[i32],
    smoothing: Smoothing,
    grid: &GridRef<T>,
) -> Result<Vec<Curve<T>>> {
    let positions: Vec<f64> = (0..12).map(month_position).collect();
    let basis = SplineBasis::default();
    let month = month_grid::<T>();
    years
        .iter()
        .map(|&y| {
            let vals = series.year(y).ok_or_else(|| Error::InvalidInput(format!("year {y} is not complete in the series")))?;
            match smoothing {
                Smoothing::None => Curve::new(month.clone(), vals.iter().map(|&v| T::of(v)).collect()),
                Smoothing::Spline { penalty } => {
                    let c = basis.fit(&positions, vals, penalty)?;
                    Curve::new(grid.clone(), grid.points().iter().map(|&t| T::of(basis.evaluate(&c, t.as_f64()))).collect())
                }
            }
        })
        .collect()
}

/// Linear interpolation of a curve at the twelve month positions.
pub fn at_months<T: Scalar>(x: &Curve<T>) -> Vec<f64> {
    let pts: Vec<f64> = x.grid().points().iter().map(|p| p.as_f64()).collect();
    let vals: Vec<f64> = x.values().iter().map(|v| v.as_f64()).collect();
    (0..12)
        .map(|j| {
            let t = month_position(j);
            let i = pts.partition_point(|&p| p <= t).clamp(1, pts.len() - 1);
            let (a, b) = (pts[i - 1], pts[i]);
            let w = if b > a { (t - a) / (b - a) } else { 0.0 };
            vals[i - 1] + w * (vals[i] - vals[i - 1])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_of(rows: &[(i32, u32, f64)]) -> String {
        let mut s = String::from("year,month,value\n");
        for (y, m, v) in rows {
            s.push_str(&format!("{y},{m},{v}\n"));
        }
        s
    }

    #[test]
    fn one_year() {
        let rows: Vec<_> = (1..=12).map(|m| (1950, m, 20.0 + m as f64)).collect();
        let s = ingest_monthly_reader(csv_of(&rows).as_bytes()).unwrap();
        assert_eq!(s.len(), 12);
        assert_eq!(s.whole_years(), vec![1950]);
    }

    #[test]
    fn gap_duplicate_and_garbage_report_rows() {
        let rows: Vec<_> = (1..=12).filter(|&m| m != 6).map(|m| (1950, m, 1.0)).collect();
        let err = ingest_monthly_reader(csv_of(&rows).as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Data { row: 7, .. }), "{err}");
        let dup = "year,month,value\n1950,1,1\n1950,1,2\n";
        assert!(matches!(ingest_monthly_reader(dup.as_bytes()).unwrap_err(), Error::Data { row: 3, .. }));
        let bad = "year,month,value\n1950,1,1\n1950,2,abc\n";
        assert!(matches!(ingest_monthly_reader(bad.as_bytes()).unwrap_err(), Error::Data { row: 3, .. }));
        let hdr = "yr,month,value\n1950,1,1\n";
        assert!(matches!(ingest_monthly_reader(hdr.as_bytes()).unwrap_err(), Error::Data { row: 1, .. }));
    }

    #[test]
    fn basis_is_partition_of_unity() {
        let b = SplineBasis::default();
        assert_eq!(b.dim(), 8);
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let s: f64 = (0..8).map(|k| b.value(k, x)).sum();
            assert!((s - 1.0).abs() < 1e-12, "{x}: {s}");
        }
        // affine functions have no roughness
        let r = b.roughness();
        let ones = vec![1.0; 8];
        for i in 0..8 {
            let v: f64 = (0..8).map(|j| r[i * 8 + j] * ones[j]).sum();
            assert!(v.abs() < 1e-8);
        }
    }

    #[test]
    fn roughness_matches_fine_quadrature() {
        let b = SplineBasis::default();
        let r = b.roughness();
        let n = 200_000;
        let (i, j) = (3, 4);
        let mut q = 0.0;
        for s in 0..n {
            let x = (s as f64 + 0.5) / n as f64;
            q += b.second_derivative(i, x) * b.second_derivative(j, x);
        }
        q /= n as f64;
        assert!((q - r[i * 8 + j]).abs() < 1e-6 * r[i * 8 + j].abs().max(1.0));
    }

    fn series(vals: impl Fn(usize) -> f64) -> ScalarSeries {
        ScalarSeries { stamps: (1..=12).map(|m| (1950, m)).collect(), values: (0..12).map(vals).collect() }
    }

    #[test]
    fn constant_year_stays_constant() {
        let s = series(|_| 24.5);
        let g = Grid::<f64>::uniform(101).unwrap();
        for sm in [Smoothing::None, Smoothing::Spline { penalty: 0.0 }, Smoothing::Spline { penalty: 1e3 }] {
            let c = &series_to_curves(&s, &[1950], sm, &g).unwrap()[0];
            let worst = c.values().iter().map(|v| (v - 24.5).abs()).fold(0.0, f64::max);
            // heavy penalties leave the normal equations ill-conditioned
            assert!(worst < 1e-8 * 24.5, "{sm:?}: {worst:e}");
        }
    }

    #[test]
    fn no_smoothing_round_trip() {
        let s = series(|j| (j as f64 * 0.7).sin() + 25.0);
        let g = Grid::<f64>::uniform(101).unwrap();
        let c = &series_to_curves(&s, &[1950], Smoothing::None, &g).unwrap()[0];
        assert_eq!(c.len(), 12);
        assert_eq!(at_months(c), s.values);
        assert!(series_to_curves(&s, &[1951], Smoothing::None, &g).is_err());
    }

    #[test]
    fn heavy_penalty_tends_to_least_squares_line() {
        let s = series(|j| (j as f64 * 0.9).cos() * 2.0 + 0.1 * j as f64);
        let xs: Vec<f64> = (0..12).map(month_position).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 12.0, s.values.iter().sum::<f64>() / 12.0);
        let slope = xs.iter().zip(&s.values).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        let g = Grid::<f64>::uniform(101).unwrap();
        let line = Curve::from_fn(&g, |t| my + slope * (t - mx));
        let dist: Vec<f64> = [1e-2, 1e0, 1e2, 1e4]
            .iter()
            .map(|&p| (&series_to_curves(&s, &[1950], Smoothing::Spline { penalty: p }, &g).unwrap()[0] - &line).norm())
            .collect();
        assert!(dist.windows(2).all(|w| w[1] < w[0]), "{dist:?}");
        assert!(dist[3] < 1e-2);
    }
}
