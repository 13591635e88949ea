//! CSV formats for market inputs and calibration outputs. All files carry
//! headers, UTF-8 text, '.' decimal separators.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{DiscountCurve, VolQuoteGrid};
use crate::pricing::ReportRecord;
use crate::surface::{SliceSurface, SurfaceKind};

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    tenor: f64,
    df: f64,
}

/// Curve CSV: `tenor,df` rows, ascending tenors.
pub fn write_curve_csv(path: &Path, curve: &DiscountCurve) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (t, d) in curve.tenors().iter().zip(curve.dfs()) {
        w.serialize(CurveRow { tenor: *t, df: *d })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv(path: &Path) -> Result<DiscountCurve> {
    let mut r = csv::Reader::from_path(path)?;
    let mut tenors = Vec::new();
    let mut dfs = Vec::new();
    for row in r.deserialize() {
        let row: CurveRow = row?;
        tenors.push(row.tenor);
        dfs.push(row.df);
    }
    DiscountCurve::new(tenors, dfs)
}

#[derive(Debug, Serialize, Deserialize)]
struct QuoteRow {
    expiry: f64,
    strike: f64,
    vol: f64,
}

/// Quote CSV: `expiry,strike,vol` rows grouped by expiry, both ascending.
pub fn write_quotes_csv(path: &Path, quotes: &VolQuoteGrid) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (i, &expiry) in quotes.expiries.iter().enumerate() {
        for (k, v) in quotes.strikes[i].iter().zip(&quotes.vols[i]) {
            w.serialize(QuoteRow { expiry, strike: *k, vol: *v })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_quotes_csv(path: &Path) -> Result<VolQuoteGrid> {
    let mut r = csv::Reader::from_path(path)?;
    let mut expiries: Vec<f64> = Vec::new();
    let mut strikes: Vec<Vec<f64>> = Vec::new();
    let mut vols: Vec<Vec<f64>> = Vec::new();
    for row in r.deserialize() {
        let row: QuoteRow = row?;
        if expiries.last() != Some(&row.expiry) {
            expiries.push(row.expiry);
            strikes.push(Vec::new());
            vols.push(Vec::new());
        }
        strikes.last_mut().unwrap().push(row.strike);
        vols.last_mut().unwrap().push(row.vol);
    }
    VolQuoteGrid::new(expiries, strikes, vols)
}

#[derive(Debug, Serialize, Deserialize)]
struct LocalVolRow {
    t: f64,
    strike: f64,
    sigma_lv: f64,
    mc_error: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct LeverageRow {
    t: f64,
    strike: f64,
    leverage: f64,
}

/// Surface CSV. Local vol: `t,strike,sigma_lv,mc_error`; leverage:
/// `t,strike,leverage`. Rows grouped by slice time.
pub fn write_surface_csv(path: &Path, surface: &SliceSurface) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for i in 0..surface.n_slices() {
        let t = surface.times()[i];
        for (j, k) in surface.slice_strikes(i).iter().enumerate() {
            match surface.kind() {
                SurfaceKind::LocalVol => w.serialize(LocalVolRow {
                    t,
                    strike: *k,
                    sigma_lv: surface.slice_values(i)[j],
                    mc_error: surface.slice_errors(i)[j],
                })?,
                SurfaceKind::Leverage => w.serialize(LeverageRow {
                    t,
                    strike: *k,
                    leverage: surface.slice_values(i)[j],
                })?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_surface_csv(path: &Path, kind: SurfaceKind) -> Result<SliceSurface> {
    let mut r = csv::Reader::from_path(path)?;
    let mut surface = SliceSurface::new(kind);
    let mut cur_t: Option<f64> = None;
    let mut strikes = Vec::new();
    let mut values = Vec::new();
    let mut errors = Vec::new();
    let mut flush =
        |surface: &mut SliceSurface, t: f64, s: &mut Vec<f64>, v: &mut Vec<f64>, e: &mut Vec<f64>| {
            if s.is_empty() {
                return Ok(());
            }
            surface.push_slice(
                t,
                std::mem::take(s),
                std::mem::take(v),
                Some(std::mem::take(e)),
            )
        };
    for row in r.into_records() {
        let row = row?;
        let parse = |i: usize| -> Result<f64> {
            row.get(i)
                .ok_or_else(|| Error::Invalid(format!("short CSV row: {row:?}")))?
                .parse::<f64>()
                .map_err(|e| Error::Invalid(format!("bad number in CSV: {e}")))
        };
        let t = parse(0)?;
        if cur_t.is_some() && cur_t != Some(t) {
            flush(&mut surface, cur_t.unwrap(), &mut strikes, &mut values, &mut errors)?;
        }
        cur_t = Some(t);
        strikes.push(parse(1)?);
        values.push(parse(2)?);
        errors.push(if kind == SurfaceKind::LocalVol { parse(3)? } else { 0.0 });
    }
    if let Some(t) = cur_t {
        flush(&mut surface, t, &mut strikes, &mut values, &mut errors)?;
    }
    if surface.is_empty() {
        return Err(Error::Invalid(format!("empty surface file {}", path.display())));
    }
    Ok(surface)
}

#[derive(Debug, Serialize)]
struct ReportRow {
    t: f64,
    strike: f64,
    mc_price: f64,
    mc_se: f64,
    bs_price: f64,
    diff: f64,
    iv_mc: Option<f64>,
    iv_lo: Option<f64>,
    iv_hi: Option<f64>,
}

/// Report CSV: `t,strike,mc_price,mc_se,bs_price,diff,iv_mc,iv_lo,iv_hi`;
/// failed implied-vol inversions are left empty.
pub fn write_report_csv(path: &Path, records: &[ReportRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(ReportRow {
            t: r.t,
            strike: r.strike,
            mc_price: r.mc_price,
            mc_se: r.mc_se,
            bs_price: r.bs_price,
            diff: r.diff,
            iv_mc: r.iv_mc,
            iv_lo: r.iv_lo,
            iv_hi: r.iv_hi,
        })?;
    }
    w.flush()?;
    Ok(())
}
