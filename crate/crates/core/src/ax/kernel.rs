//! The AX kernel: `local_grad3`, the geometric accumulation,
//! `local_grad3_t`, and the per-element and whole-mesh drivers.
//!
//! The arithmetic lives in generic slice functions so the same code path can
//! run on `f64` and on the operation-counting scalar.

use rayon::prelude::*;

use super::matrix::{mxm_into, Scalar};
use super::types::{DerivMatrix, ElementField, GeomFactors, GradTriple, ProblemConfig};
use crate::error::{Error, Result};

pub(crate) fn grad3_slices<T: Scalar>(u: &[T], d: &[T], dt: &[T], n: usize, ur: &mut [T], us: &mut [T], ut: &mut [T]) {
    let nn = n * n;
    // ur = d * u viewed as n x n^2
    mxm_into(d, n, u, n, ur, nn);
    // us(:,:,k) = u(:,:,k) * dt
    for k in 0..n {
        let plane = nn * k..nn * (k + 1);
        mxm_into(&u[plane.clone()], n, dt, n, &mut us[plane], n);
    }
    // ut = u viewed as n^2 x n, times dt
    mxm_into(u, nn, dt, n, ut, n);
}

pub(crate) fn accumulate_slices<T: Scalar>(g: &[T], ur: &mut [T], us: &mut [T], ut: &mut [T]) {
    for (p, gp) in g.chunks_exact(6).enumerate() {
        let (r, s, t) = (ur[p], us[p], ut[p]);
        let wr = gp[0] * r + gp[1] * s + gp[2] * t;
        let ws = gp[1] * r + gp[3] * s + gp[4] * t;
        let wt = gp[2] * r + gp[4] * s + gp[5] * t;
        ur[p] = wr;
        us[p] = ws;
        ut[p] = wt;
    }
}

/// `w = dt * wr + ws(:,:,k) * d + wt * d`, with `scratch` sized n^3.
#[allow(clippy::too_many_arguments)]
pub(crate) fn grad3_t_slices<T: Scalar>(
    wr: &[T],
    ws: &[T],
    wt: &[T],
    d: &[T],
    dt: &[T],
    n: usize,
    w: &mut [T],
    scratch: &mut [T],
) {
    let nn = n * n;
    mxm_into(dt, n, wr, n, w, nn);
    for k in 0..n {
        let plane = nn * k..nn * (k + 1);
        mxm_into(&ws[plane.clone()], n, d, n, &mut scratch[plane], n);
    }
    for (wi, si) in w.iter_mut().zip(scratch.iter()) {
        *wi = *wi + *si;
    }
    mxm_into(wt, nn, d, n, scratch, n);
    for (wi, si) in w.iter_mut().zip(scratch.iter()) {
        *wi = *wi + *si;
    }
}

/// Full per-element operator on raw slices.
pub(crate) fn ax_element_slices<T: Scalar>(u: &[T], g: &[T], d: &[T], dt: &[T], n: usize, zero: T) -> Vec<T> {
    let np = n * n * n;
    let mut ur = vec![zero; np];
    let mut us = vec![zero; np];
    let mut ut = vec![zero; np];
    grad3_slices(u, d, dt, n, &mut ur, &mut us, &mut ut);
    accumulate_slices(g, &mut ur, &mut us, &mut ut);
    let mut w = vec![zero; np];
    let mut scratch = vec![zero; np];
    grad3_t_slices(&ur, &us, &ut, d, dt, n, &mut w, &mut scratch);
    w
}

fn check_n(what: &str, got: usize, cfg: &ProblemConfig) -> Result<()> {
    if got != cfg.n() {
        return Err(Error::contract(format!(
            "{what} sized for n={got}, configuration has n={}",
            cfg.n()
        )));
    }
    Ok(())
}

/// Reference-direction derivatives of `u`:
/// `ur = d u`, `us = u dt` per k-plane, `ut = u dt` along the last index.
pub fn local_grad3(u: &ElementField, d: &DerivMatrix, cfg: &ProblemConfig) -> Result<GradTriple> {
    check_n("u", u.n(), cfg)?;
    check_n("derivative matrix", d.n(), cfg)?;
    let n = cfg.n();
    let np = cfg.points_per_element();
    let (mut ur, mut us, mut ut) = (vec![0.0; np], vec![0.0; np], vec![0.0; np]);
    grad3_slices(u.values(), d.d(), d.dt(), n, &mut ur, &mut us, &mut ut);
    Ok(GradTriple {
        ur: ElementField::from_raw(n, ur),
        us: ElementField::from_raw(n, us),
        ut: ElementField::from_raw(n, ut),
    })
}

/// Applies the symmetric 3x3 metric tensor at every grid point.
pub fn local_accumulate(grads: &GradTriple, g: &GeomFactors) -> Result<GradTriple> {
    let n = grads.n();
    if g.n() != n || grads.us.n() != n || grads.ut.n() != n {
        return Err(Error::contract("gradient and geometric factor sizes differ"));
    }
    let mut ur = grads.ur.values().to_vec();
    let mut us = grads.us.values().to_vec();
    let mut ut = grads.ut.values().to_vec();
    accumulate_slices(g.values(), &mut ur, &mut us, &mut ut);
    Ok(GradTriple {
        ur: ElementField::from_raw(n, ur),
        us: ElementField::from_raw(n, us),
        ut: ElementField::from_raw(n, ut),
    })
}

/// Adjoint of [`local_grad3`] under the Euclidean inner product.
pub fn local_grad3_t(grads: &GradTriple, d: &DerivMatrix, cfg: &ProblemConfig) -> Result<ElementField> {
    check_n("gradient triple", grads.n(), cfg)?;
    check_n("us", grads.us.n(), cfg)?;
    check_n("ut", grads.ut.n(), cfg)?;
    check_n("derivative matrix", d.n(), cfg)?;
    let n = cfg.n();
    let np = cfg.points_per_element();
    let mut w = vec![0.0; np];
    let mut scratch = vec![0.0; np];
    grad3_t_slices(
        grads.ur.values(),
        grads.us.values(),
        grads.ut.values(),
        d.d(),
        d.dt(),
        n,
        &mut w,
        &mut scratch,
    );
    Ok(ElementField::from_raw(n, w))
}

/// Poisson operator on one element: `local_grad3_t(local_accumulate(local_grad3(u)))`.
pub fn ax_element(u: &ElementField, g: &GeomFactors, d: &DerivMatrix, cfg: &ProblemConfig) -> Result<ElementField> {
    check_n("u", u.n(), cfg)?;
    check_n("geometric factors", g.n(), cfg)?;
    check_n("derivative matrix", d.n(), cfg)?;
    let n = cfg.n();
    Ok(ElementField::from_raw(
        n,
        ax_element_slices(u.values(), g.values(), d.d(), d.dt(), n, 0.0),
    ))
}

fn check_mesh(u: &[ElementField], g: &[GeomFactors], cfg: &ProblemConfig) -> Result<()> {
    if u.len() != cfg.nelt() || g.len() != cfg.nelt() {
        return Err(Error::contract(format!(
            "expected {} elements, got {} fields and {} factor sets",
            cfg.nelt(),
            u.len(),
            g.len()
        )));
    }
    Ok(())
}

/// Applies [`ax_element`] to every element in order.
pub fn ax(u: &[ElementField], g: &[GeomFactors], d: &DerivMatrix, cfg: &ProblemConfig) -> Result<Vec<ElementField>> {
    check_mesh(u, g, cfg)?;
    u.iter().zip(g).map(|(ue, ge)| ax_element(ue, ge, d, cfg)).collect()
}

/// Same as [`ax`], with elements evaluated on the rayon pool. Elements share
/// nothing mutable, so results are bitwise identical to the serial loop.
pub fn ax_par(
    u: &[ElementField],
    g: &[GeomFactors],
    d: &DerivMatrix,
    cfg: &ProblemConfig,
) -> Result<Vec<ElementField>> {
    check_mesh(u, g, cfg)?;
    u.par_iter()
        .zip(g.par_iter())
        .map(|(ue, ge)| ax_element(ue, ge, d, cfg))
        .collect()
}
