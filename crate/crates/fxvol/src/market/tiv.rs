//! Total implied variance surface w(y, T) = Sigma(K, T)^2 T in
//! log-moneyness coordinates y = log(K / F_T), with the partial
//! derivatives the Dupire formulas need.
//!
//! Interpolation: not-a-knot cubic spline in y per slice, linear in w
//! across T at fixed y. Extrapolation is flat in y beyond the slice span
//! and flat in dw/dT beyond the last slice.

use crate::error::{Error, Result};
use crate::market::curves::{forward, DiscountCurve};
use crate::math::CubicSpline;

/// Raw market implied volatility quotes: per expiry, an ascending strike
/// row with absolute vols (per sqrt-year).
#[derive(Debug, Clone)]
pub struct VolQuoteGrid {
    pub expiries: Vec<f64>,
    pub strikes: Vec<Vec<f64>>,
    pub vols: Vec<Vec<f64>>,
}

impl VolQuoteGrid {
    pub fn new(expiries: Vec<f64>, strikes: Vec<Vec<f64>>, vols: Vec<Vec<f64>>) -> Result<Self> {
        if expiries.is_empty() {
            return Err(Error::Invalid("empty quote grid".into()));
        }
        if strikes.len() != expiries.len() || vols.len() != expiries.len() {
            return Err(Error::Invalid("quote rows must match expiries".into()));
        }
        for w in expiries.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("quote expiries must be increasing".into()));
            }
        }
        if expiries[0] <= 0.0 {
            return Err(Error::Invalid("quote expiries must be positive".into()));
        }
        for (ks, vs) in strikes.iter().zip(&vols) {
            if ks.len() < 2 || ks.len() != vs.len() {
                return Err(Error::Invalid("each expiry needs >= 2 (strike, vol) pairs".into()));
            }
            for w in ks.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::Invalid("strikes must be increasing per expiry".into()));
                }
            }
            if vs.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Invalid("implied vols must be positive".into()));
            }
        }
        Ok(Self { expiries, strikes, vols })
    }

    pub fn max_expiry(&self) -> f64 {
        *self.expiries.last().unwrap()
    }
}

/// Slice layout of the variance surface.
#[derive(Debug, Clone, Copy)]
pub struct TivGridSpec {
    /// Spacing of the time slices in years.
    pub slice_spacing: f64,
    /// Log-moneyness points per slice.
    pub points_per_slice: usize,
    /// Half-width of each slice in ATMF standard deviations.
    pub stdev_span: f64,
}

impl Default for TivGridSpec {
    fn default() -> Self {
        Self { slice_spacing: 0.05, points_per_slice: 100, stdev_span: 3.5 }
    }
}

/// Evaluated surface point.
#[derive(Debug, Clone, Copy)]
pub struct TivPoint {
    pub w: f64,
    pub dw_dy: f64,
    pub d2w_dy2: f64,
    pub dw_dt: f64,
}

struct Slice {
    t: f64,
    spline: CubicSpline,
    forward: f64,
    atmf_sigma: f64,
}

/// Arbitrage-guarded total implied variance surface.
pub struct TivSurface {
    slices: Vec<Slice>,
}

impl TivSurface {
    /// Build the surface from quotes. Slice times are the multiples of
    /// `spec.slice_spacing` up to the last quote expiry, plus the quote
    /// expiries themselves (so quoted variances are reproduced exactly).
    pub fn build(
        quotes: &VolQuoteGrid,
        dom: &DiscountCurve,
        fgn: &DiscountCurve,
        spot: f64,
        spec: &TivGridSpec,
    ) -> Result<Self> {
        if !(spot > 0.0) {
            return Err(Error::Invalid("spot must be positive".into()));
        }
        if !(spec.slice_spacing > 0.0) || spec.points_per_slice < 2 || !(spec.stdev_span >= 0.0) {
            return Err(Error::Invalid("bad TIV grid spec".into()));
        }
        let t_max = quotes.max_expiry();
        if t_max > dom.max_tenor() + 1e-12 || t_max > fgn.max_tenor() + 1e-12 {
            return Err(Error::Invalid("curves shorter than quote horizon".into()));
        }

        // Per-expiry variance smiles in log-moneyness of that expiry.
        let mut quote_splines = Vec::with_capacity(quotes.expiries.len());
        for (i, &te) in quotes.expiries.iter().enumerate() {
            let fe = forward(spot, dom, fgn, te)?;
            let ys: Vec<f64> = quotes.strikes[i].iter().map(|k| (k / fe).ln()).collect();
            let ws: Vec<f64> = quotes.vols[i].iter().map(|v| v * v * te).collect();
            quote_splines.push(CubicSpline::new(ys, ws)?);
        }
        let quote_w = |y: f64, t: f64| -> f64 {
            let ts = &quotes.expiries;
            if t <= ts[0] {
                return quote_splines[0].value(y) * t / ts[0];
            }
            let n = ts.len();
            if t >= ts[n - 1] {
                return quote_splines[n - 1].value(y) * t / ts[n - 1];
            }
            let i = ts.partition_point(|&x| x < t) - 1;
            let lam = (t - ts[i]) / (ts[i + 1] - ts[i]);
            (1.0 - lam) * quote_splines[i].value(y) + lam * quote_splines[i + 1].value(y)
        };

        let mut times: Vec<f64> = Vec::new();
        let mut k = 1usize;
        loop {
            let t = spec.slice_spacing * k as f64;
            if t > t_max + 1e-9 {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.extend(quotes.expiries.iter().copied());
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

        let mut slices = Vec::with_capacity(times.len());
        for &t in &times {
            let f_t = forward(spot, dom, fgn, t)?;
            let w_atm = quote_w(0.0, t);
            if !(w_atm > 0.0) {
                return Err(Error::Invalid(format!("non-positive ATMF variance at T={t}")));
            }
            let sigma_atm = (w_atm / t).sqrt();
            let half = (spec.stdev_span * sigma_atm * t.sqrt()).max(1e-8);
            let n = spec.points_per_slice;
            let mut ys: Vec<f64> =
                (0..n).map(|j| -half + 2.0 * half * j as f64 / (n - 1) as f64).collect();
            // Slices on a quote expiry adopt the quoted log-moneynesses as
            // knots so quoted variances round-trip exactly.
            if let Some(qi) = quotes.expiries.iter().position(|&te| (te - t).abs() < 1e-9) {
                let fe = forward(spot, dom, fgn, quotes.expiries[qi])?;
                ys.extend(
                    quotes.strikes[qi]
                        .iter()
                        .map(|k| (k / fe).ln())
                        .filter(|y| y.abs() <= half),
                );
                ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
                ys.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
            }
            let ws: Vec<f64> = ys.iter().map(|&y| quote_w(y, t)).collect();
            if ws.iter().any(|&w| !(w >= 0.0)) {
                return Err(Error::Invalid(format!("negative total variance at T={t}")));
            }
            slices.push(Slice {
                t,
                spline: CubicSpline::new(ys, ws)?,
                forward: f_t,
                atmf_sigma: sigma_atm,
            });
        }

        let surface = Self { slices };
        surface.check_calendar()?;
        Ok(surface)
    }

    /// Calendar-arbitrage guard: w must be non-decreasing in T at fixed y
    /// across stored slices.
    fn check_calendar(&self) -> Result<()> {
        for pair in self.slices.windows(2) {
            let (lo, hi) = (&pair[0], &pair[1]);
            let n = 41;
            let (ymin, ymax) = (hi.spline.x_min(), hi.spline.x_max());
            for j in 0..n {
                let y = ymin + (ymax - ymin) * j as f64 / (n - 1) as f64;
                let w_lo = lo.spline.value(y);
                let w_hi = hi.spline.value(y);
                if w_hi < w_lo - 1e-10 {
                    return Err(Error::CalendarArbitrage { y, t0: lo.t, t1: hi.t });
                }
            }
        }
        Ok(())
    }

    pub fn slice_times(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.t).collect()
    }

    pub fn first_slice_time(&self) -> f64 {
        self.slices[0].t
    }

    pub fn last_slice_time(&self) -> f64 {
        self.slices.last().unwrap().t
    }

    /// Forward stored with the nearest slice grid (interpolated between).
    pub fn forward_at(&self, t: f64) -> f64 {
        match self.bracket(t) {
            Bracket::Single(i) => self.slices[i].forward,
            Bracket::Pair(i, lam) => {
                (1.0 - lam) * self.slices[i].forward + lam * self.slices[i + 1].forward
            }
        }
    }

    /// ATMF volatility at t, from the stored slices.
    pub fn atmf_sigma(&self, t: f64) -> f64 {
        match self.bracket(t) {
            Bracket::Single(i) => self.slices[i].atmf_sigma,
            Bracket::Pair(i, lam) => {
                (1.0 - lam) * self.slices[i].atmf_sigma + lam * self.slices[i + 1].atmf_sigma
            }
        }
    }

    fn bracket(&self, t: f64) -> Bracket {
        let n = self.slices.len();
        if n == 1 {
            return Bracket::Single(0);
        }
        if t >= self.slices[n - 1].t {
            let i = n - 2;
            let lam = (t - self.slices[i].t) / (self.slices[i + 1].t - self.slices[i].t);
            return Bracket::Pair(i, lam);
        }
        let i = self.slices.partition_point(|s| s.t <= t).saturating_sub(1);
        let lam = (t - self.slices[i].t) / (self.slices[i + 1].t - self.slices[i].t);
        Bracket::Pair(i, lam)
    }

    fn eval_slice(&self, i: usize, y: f64) -> (f64, f64, f64) {
        let sp = &self.slices[i].spline;
        if y < sp.x_min() || y > sp.x_max() {
            // Flat wings: value held, y-derivatives vanish.
            let (w, _, _) = sp.eval(y);
            (w, 0.0, 0.0)
        } else {
            sp.eval(y)
        }
    }

    /// w and its partials at (y, T). T before the first slice is an error;
    /// beyond the last slice the surface extends with flat dw/dT.
    pub fn eval(&self, y: f64, t: f64) -> Result<TivPoint> {
        let t0 = self.first_slice_time();
        if t < t0 - 1e-12 {
            return Err(Error::BeforeFirstSlice(t, t0));
        }
        let t = t.max(t0);
        match self.bracket(t) {
            Bracket::Single(i) => {
                // One slice: variance scales proportionally with T.
                let (w, dy, d2y) = self.eval_slice(i, y);
                let ti = self.slices[i].t;
                let scale = t / ti;
                Ok(TivPoint {
                    w: w * scale,
                    dw_dy: dy * scale,
                    d2w_dy2: d2y * scale,
                    dw_dt: w / ti,
                })
            }
            Bracket::Pair(i, lam) => {
                let (w0, dy0, d2y0) = self.eval_slice(i, y);
                let (w1, dy1, d2y1) = self.eval_slice(i + 1, y);
                let dt = self.slices[i + 1].t - self.slices[i].t;
                Ok(TivPoint {
                    w: (1.0 - lam) * w0 + lam * w1,
                    dw_dy: (1.0 - lam) * dy0 + lam * dy1,
                    d2w_dy2: (1.0 - lam) * d2y0 + lam * d2y1,
                    dw_dt: (w1 - w0) / dt,
                })
            }
        }
    }
}

enum Bracket {
    Single(usize),
    Pair(usize, f64),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::synth::{flat_quote_grid, SmileSpec};

    fn flat_setup(sigma: f64) -> (TivSurface, DiscountCurve, DiscountCurve) {
        let dom = DiscountCurve::flat(0.0, 3.0);
        let fgn = DiscountCurve::flat(0.0, 3.0);
        let quotes = flat_quote_grid(sigma, &dom, &fgn, 1.0, &[0.5, 1.0, 2.0], 9, 3.0);
        let spec = TivGridSpec { slice_spacing: 0.25, points_per_slice: 21, stdev_span: 3.4 };
        let s = TivSurface::build(&quotes, &dom, &fgn, 1.0, &spec).unwrap();
        (s, dom, fgn)
    }

    #[test]
    fn flat_smile_gives_sigma_sq_t() {
        let (s, _, _) = flat_setup(0.2);
        for &t in &[0.25, 0.6, 1.0, 1.7, 2.0] {
            for &y in &[-0.3, 0.0, 0.4] {
                let p = s.eval(y, t).unwrap();
                assert!((p.w - 0.04 * t).abs() < 1e-12, "w at ({y},{t}) = {}", p.w);
                assert!(p.dw_dy.abs() < 1e-10);
                assert!(p.d2w_dy2.abs() < 1e-9);
                assert!((p.dw_dt - 0.04).abs() < 1e-10, "dw_dt = {}", p.dw_dt);
            }
        }
    }

    #[test]
    fn single_expiry_flat() {
        let dom = DiscountCurve::flat(0.0, 1.0);
        let quotes = flat_quote_grid(0.2, &dom, &dom, 1.0, &[1.0], 9, 3.0);
        let spec = TivGridSpec { slice_spacing: 1.0, points_per_slice: 15, stdev_span: 3.2 };
        let s = TivSurface::build(&quotes, &dom, &dom, 1.0, &spec).unwrap();
        // y(K, 1) = log K with zero rates and unit spot.
        let p = s.eval((1.1f64).ln(), 1.0).unwrap();
        assert!((p.w - 0.04).abs() < 1e-12);
    }

    #[test]
    fn quote_nodes_round_trip() {
        let dom = DiscountCurve::flat(0.02, 3.0);
        let fgn = DiscountCurve::flat(0.01, 3.0);
        let spot = 1.1;
        let smile = SmileSpec { base: 0.2, skew: -0.02, curv: 0.04, eta: 0.25 };
        let quotes = smile.quote_grid(&dom, &fgn, spot, &[0.3, 0.7, 1.3, 2.0], 15, 2.8);
        let spec = TivGridSpec { slice_spacing: 0.1, points_per_slice: 60, stdev_span: 3.5 };
        let s = TivSurface::build(&quotes, &dom, &fgn, spot, &spec).unwrap();
        for (i, &te) in quotes.expiries.iter().enumerate() {
            let fe = forward(spot, &dom, &fgn, te).unwrap();
            for (k, v) in quotes.strikes[i].iter().zip(&quotes.vols[i]) {
                let y = (k / fe).ln();
                let p = s.eval(y, te).unwrap();
                let expected = v * v * te;
                assert!(
                    (p.w - expected).abs() < 1e-12 * expected.max(1.0),
                    "round trip at K={k}, T={te}: {} vs {expected}",
                    p.w
                );
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let dom = DiscountCurve::flat(0.015, 3.0);
        let fgn = DiscountCurve::flat(0.005, 3.0);
        let spot = 1.0;
        let smile = SmileSpec { base: 0.2, skew: -0.015, curv: 0.03, eta: 0.25 };
        let quotes = smile.quote_grid(&dom, &fgn, spot, &[0.5, 1.0, 1.5, 2.0], 21, 3.0);
        let spec = TivGridSpec { slice_spacing: 0.125, points_per_slice: 80, stdev_span: 3.5 };
        let s = TivSurface::build(&quotes, &dom, &fgn, spot, &spec).unwrap();

        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let (hy, ht) = (1e-5, 1e-4);
        for _ in 0..100 {
            let t = 0.3 + 1.5 * next();
            let y = -0.25 + 0.5 * next();
            let p = s.eval(y, t).unwrap();
            let wp = s.eval(y + hy, t).unwrap().w;
            let wm = s.eval(y - hy, t).unwrap().w;
            let fd_y = (wp - wm) / (2.0 * hy);
            let fd_yy = (wp - 2.0 * p.w + wm) / (hy * hy);
            let fd_t = (s.eval(y, t + ht).unwrap().w - s.eval(y, t - ht).unwrap().w) / (2.0 * ht);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-3);
            assert!(rel(p.dw_dy, fd_y) < 1e-5, "dw_dy at ({y:.3},{t:.3}): {} vs {fd_y}", p.dw_dy);
            assert!(rel(p.d2w_dy2, fd_yy) < 1e-4, "d2w at ({y:.3},{t:.3}): {} vs {fd_yy}", p.d2w_dy2);
            assert!(rel(p.dw_dt, fd_t) < 1e-5, "dw_dt at ({y:.3},{t:.3}): {} vs {fd_t}", p.dw_dt);
        }
    }

    #[test]
    fn rejects_calendar_arbitrage() {
        let dom = DiscountCurve::flat(0.0, 3.0);
        // Vol collapsing hard enough that w = vol^2 T decreases.
        let quotes = VolQuoteGrid::new(
            vec![0.5, 1.0],
            vec![vec![0.8, 1.0, 1.2], vec![0.8, 1.0, 1.2]],
            vec![vec![0.3, 0.3, 0.3], vec![0.1, 0.1, 0.1]],
        )
        .unwrap();
        let spec = TivGridSpec { slice_spacing: 0.25, points_per_slice: 11, stdev_span: 2.0 };
        let err = TivSurface::build(&quotes, &dom, &dom, 1.0, &spec);
        assert!(matches!(err, Err(Error::CalendarArbitrage { .. })));
    }

    #[test]
    fn rejects_time_before_first_slice() {
        let (s, _, _) = flat_setup(0.2);
        assert!(matches!(s.eval(0.0, 0.01), Err(Error::BeforeFirstSlice(_, _))));
    }

    #[test]
    fn flat_dwdt_beyond_last_slice() {
        let (s, _, _) = flat_setup(0.2);
        let p = s.eval(0.1, 2.5).unwrap();
        assert!((p.w - 0.04 * 2.5).abs() < 1e-10);
        assert!((p.dw_dt - 0.04).abs() < 1e-10);
    }

    #[test]
    fn flat_y_extrapolation() {
        let (s, _, _) = flat_setup(0.2);
        let edge = s.eval(5.0, 1.0).unwrap();
        assert_eq!(edge.dw_dy, 0.0);
        assert_eq!(edge.d2w_dy2, 0.0);
    }

    #[test]
    fn rejects_empty_quotes() {
        assert!(VolQuoteGrid::new(vec![], vec![], vec![]).is_err());
    }
}
