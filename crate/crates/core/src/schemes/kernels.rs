//! Point-wise field kernels shared by every stepper.
//!
//! Each kernel evaluates one fixed expression per output entry. Differences
//! that reach past a conducting wall read an explicit zero operand instead of
//! branching, so every entry costs the same arithmetic; the operation counts
//! listed per kernel are therefore exact per output point.
//!
//! Two kinds of first difference appear:
//! * *plain*: H (extent `m + 1` along the axis) onto E (extent `m`),
//!   `h[p+1] − h[p]`;
//! * *padded*: E (extent `m − 1`) onto H (extent `m`), `e[p] − e[p−1]` with
//!   zeros beyond both ends.
//!
//! Constants passed in already contain the `1/Δ` factors.

use std::ops::Range;

use ndarray::{Array3, ArrayView3, ShapeBuilder, Slice, Zip};

use crate::exec::Exec;
use crate::grid::Axis;
use crate::scalar::{Real, Work};

/// Storage for a single zero, handed out as broadcast views.
struct Zero<T>([T; 1]);

impl<T: Real> Zero<T> {
    fn new() -> Self {
        Zero([T::zero()])
    }

    fn view(&self, shape: (usize, usize, usize)) -> ArrayView3<'_, T> {
        ArrayView3::from_shape(shape.strides((0, 0, 0)), &self.0)
            .expect("a zero-stride view addresses one element")
    }
}

/// Split an output extent `m ≥ 2` into first entry, interior, last entry.
fn regions(m: usize) -> [Range<usize>; 3] {
    debug_assert!(m >= 2);
    [0..1, 1..m - 1, m - 1..m]
}

/// `v` along `axis` over `r + off`; a zero view when that range falls
/// entirely outside `v`.
fn shifted<'a, T: Real>(
    mut v: ArrayView3<'a, T>,
    axis: Axis,
    r: &Range<usize>,
    off: isize,
    zero: &'a Zero<T>,
) -> ArrayView3<'a, T> {
    let len = v.len_of(axis.nd()) as isize;
    let lo = r.start as isize + off;
    let hi = r.end as isize + off;
    if lo >= 0 && hi <= len {
        v.slice_axis_inplace(axis.nd(), Slice::from(lo..hi));
        v
    } else if hi <= 0 || lo >= len {
        let mut shape = [v.dim().0, v.dim().1, v.dim().2];
        shape[axis.index()] = r.len();
        zero.view((shape[0], shape[1], shape[2]))
    } else {
        unreachable!("region straddles an array end")
    }
}

fn plain_pair<T: Real>(h: &Array3<T>, axis: Axis) -> (ArrayView3<'_, T>, ArrayView3<'_, T>) {
    (
        h.slice_axis(axis.nd(), Slice::from(1..)),
        h.slice_axis(axis.nd(), Slice::from(..-1)),
    )
}

/// `dst = base + c (h[p+1] − h[p])`. 1 M/D, 2 A/S.
pub(crate) fn plain_from<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    base: &Array3<T>,
    h: &Array3<T>,
    axis: Axis,
    c: T,
) {
    T::attribute(work);
    let (hi, lo) = plain_pair(h, axis);
    drive!(
        exec,
        Zip::from(dst).and(base).and(&hi).and(&lo),
        |d, &b, &p, &q| *d = b + c * (p - q)
    );
}

/// `dst += c (h[p+1] − h[p])`. 1 M/D, 2 A/S.
pub(crate) fn plain_accumulate<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    h: &Array3<T>,
    axis: Axis,
    c: T,
) {
    T::attribute(work);
    let (hi, lo) = plain_pair(h, axis);
    drive!(exec, Zip::from(dst).and(&hi).and(&lo), |d, &p, &q| *d = *d + c * (p - q));
}

/// `dst = c1 Δ1 h1 + c2 Δ2 h2` with plain differences. 2 M/D, 3 A/S.
#[allow(clippy::too_many_arguments)]
pub(crate) fn two_plain<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    h1: &Array3<T>,
    ax1: Axis,
    c1: T,
    h2: &Array3<T>,
    ax2: Axis,
    c2: T,
) {
    T::attribute(work);
    let (a, b) = plain_pair(h1, ax1);
    let (p, q) = plain_pair(h2, ax2);
    drive!(
        exec,
        Zip::from(dst).and(&a).and(&b).and(&p).and(&q),
        |d, &a, &b, &p, &q| *d = c1 * (a - b) + c2 * (p - q)
    );
}

/// `dst = a − dst`. 0 M/D, 1 A/S.
pub(crate) fn subtract_from<T: Real>(exec: Exec, work: Work, dst: &mut Array3<T>, a: &Array3<T>) {
    T::attribute(work);
    drive!(exec, Zip::from(dst).and(a), |d, &x| *d = x - *d);
}

/// `dst += a`. 0 M/D, 1 A/S.
pub(crate) fn add_assign<T: Real>(exec: Exec, work: Work, dst: &mut Array3<T>, a: &Array3<T>) {
    T::attribute(work);
    drive!(exec, Zip::from(dst).and(a), |d, &x| *d = *d + x);
}

/// Shared driver for the padded kernels: `f(dst, base, e[p], e[p−1])`.
fn padded_map<T: Real>(
    exec: Exec,
    dst: &mut Array3<T>,
    base: Option<&Array3<T>>,
    e: &Array3<T>,
    axis: Axis,
    f: impl Fn(&mut T, T, T, T) + Sync + Send,
) {
    let zero = Zero::new();
    let m = dst.len_of(axis.nd());
    for r in regions(m) {
        let hi = shifted(e.view(), axis, &r, 0, &zero);
        let lo = shifted(e.view(), axis, &r, -1, &zero);
        let d = dst.slice_axis_mut(axis.nd(), Slice::from(r.clone()));
        match base {
            Some(b) => {
                let b = b.slice_axis(axis.nd(), Slice::from(r.clone()));
                drive!(exec, Zip::from(d).and(&b).and(&hi).and(&lo), |d, &b, &p, &q| {
                    f(d, b, p, q)
                });
            }
            None => {
                drive!(exec, Zip::from(d).and(&hi).and(&lo), |d, &p, &q| {
                    let cur = *d;
                    f(d, cur, p, q)
                });
            }
        }
    }
}

/// `dst += c (e[p] − e[p−1])`, padded. 1 M/D, 2 A/S.
pub(crate) fn padded_accumulate<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    e: &Array3<T>,
    axis: Axis,
    c: T,
) {
    T::attribute(work);
    padded_map(exec, dst, None, e, axis, move |d, b, p, q| *d = b + c * (p - q));
}

/// `dst = base + c (e[p] − e[p−1])`, padded. 1 M/D, 2 A/S.
pub(crate) fn padded_from<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    base: &Array3<T>,
    e: &Array3<T>,
    axis: Axis,
    c: T,
) {
    T::attribute(work);
    padded_map(exec, dst, Some(base), e, axis, move |d, b, p, q| *d = b + c * (p - q));
}

/// `dst = 2 base + c (e[p] − e[p−1])`, padded. 2 M/D, 2 A/S.
pub(crate) fn padded_doubled<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    base: &Array3<T>,
    e: &Array3<T>,
    axis: Axis,
    c: T,
) {
    T::attribute(work);
    let two = T::from_f64(2.0);
    padded_map(exec, dst, Some(base), e, axis, move |d, b, p, q| {
        *d = two * b + c * (p - q)
    });
}

/// `dst = c1 Δ1 e1 + c2 Δ2 e2` with padded differences along two distinct
/// axes. 2 M/D, 3 A/S.
#[allow(clippy::too_many_arguments)]
pub(crate) fn two_padded<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    e1: &Array3<T>,
    ax1: Axis,
    c1: T,
    e2: &Array3<T>,
    ax2: Axis,
    c2: T,
) {
    T::attribute(work);
    let zero = Zero::new();
    for r1 in regions(dst.len_of(ax1.nd())) {
        for r2 in regions(dst.len_of(ax2.nd())) {
            let a = shifted(shifted(e1.view(), ax1, &r1, 0, &zero), ax2, &r2, 0, &zero);
            let b = shifted(shifted(e1.view(), ax1, &r1, -1, &zero), ax2, &r2, 0, &zero);
            let p = shifted(shifted(e2.view(), ax2, &r2, 0, &zero), ax1, &r1, 0, &zero);
            let q = shifted(shifted(e2.view(), ax2, &r2, -1, &zero), ax1, &r1, 0, &zero);
            let mut d = dst.slice_axis_mut(ax1.nd(), Slice::from(r1.clone()));
            d.slice_axis_inplace(ax2.nd(), Slice::from(r2.clone()));
            drive!(
                exec,
                Zip::from(d).and(&a).and(&b).and(&p).and(&q),
                |d, &a, &b, &p, &q| *d = c1 * (a - b) + c2 * (p - q)
            );
        }
    }
}

/// Right-hand side of an original locally one-dimensional electric update,
/// `c0 e[p] + c1 (e[p+1] + e[p−1]) + c2 (h[p+1] − h[p])`, with `e` taken as
/// zero beyond the walls. 3 M/D, 4 A/S.
#[allow(clippy::too_many_arguments)]
pub(crate) fn lod_rhs<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    e: &Array3<T>,
    h: &Array3<T>,
    axis: Axis,
    c0: T,
    c1: T,
    c2: T,
) {
    T::attribute(work);
    let zero = Zero::new();
    let (hh, hl) = plain_pair(h, axis);
    for r in regions(dst.len_of(axis.nd())) {
        let slice = Slice::from(r.clone());
        let center = e.slice_axis(axis.nd(), slice);
        let plus = shifted(e.view(), axis, &r, 1, &zero);
        let minus = shifted(e.view(), axis, &r, -1, &zero);
        let a = hh.slice_axis(axis.nd(), slice);
        let b = hl.slice_axis(axis.nd(), slice);
        let d = dst.slice_axis_mut(axis.nd(), slice);
        drive!(
            exec,
            Zip::from(d).and(&center).and(&plus).and(&minus).and(&a).and(&b),
            |d, &x, &p, &m, &a, &b| *d = c0 * x + c1 * (p + m) + c2 * (a - b)
        );
    }
}

/// Magnetic update of an original locally one-dimensional sweep,
/// `dst = h + c ((x[p] − x[p−1]) + (e[p] − e[p−1]))` with `x` the old and
/// `e` the new electric field, both padded. 1 M/D, 4 A/S.
#[allow(clippy::too_many_arguments)]
pub(crate) fn lod_h<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    h: &Array3<T>,
    x: &Array3<T>,
    e: &Array3<T>,
    axis: Axis,
    c: T,
) {
    T::attribute(work);
    let zero = Zero::new();
    for r in regions(dst.len_of(axis.nd())) {
        let slice = Slice::from(r.clone());
        let xh = shifted(x.view(), axis, &r, 0, &zero);
        let xl = shifted(x.view(), axis, &r, -1, &zero);
        let eh = shifted(e.view(), axis, &r, 0, &zero);
        let el = shifted(e.view(), axis, &r, -1, &zero);
        let hb = h.slice_axis(axis.nd(), slice);
        let d = dst.slice_axis_mut(axis.nd(), slice);
        drive!(
            exec,
            Zip::from(d).and(&hb).and(&xh).and(&xl).and(&eh).and(&el),
            |d, &h, &a, &b, &p, &q| *d = h + c * ((a - b) + (p - q))
        );
    }
}

/// Right-hand side of a conventional alternating-direction electric update:
///
/// ```text
/// dst = e + c1 Δ1 h1 + c2 Δ2 h2 + c3 Δ1 Δ' e'
/// ```
///
/// where `Δ1`, `Δ2` are plain differences and the cross term differences
/// `e'` plainly along `ax1` and padded along `axp`. Two passes:
/// 2 M/D + 4 A/S, then 1 M/D + 4 A/S.
#[allow(clippy::too_many_arguments)]
pub(crate) fn adi_rhs<T: Real>(
    exec: Exec,
    work: Work,
    dst: &mut Array3<T>,
    e: &Array3<T>,
    (h1, ax1, c1): (&Array3<T>, Axis, T),
    (h2, ax2, c2): (&Array3<T>, Axis, T),
    (ep, axp, c3): (&Array3<T>, Axis, T),
) {
    T::attribute(work);
    let (a, b) = plain_pair(h1, ax1);
    let (p, q) = plain_pair(h2, ax2);
    drive!(
        exec,
        Zip::from(&mut *dst).and(e).and(&a).and(&b).and(&p).and(&q),
        |d, &x, &a, &b, &p, &q| *d = x + c1 * (a - b) + c2 * (p - q)
    );

    let zero = Zero::new();
    let (eh, el) = plain_pair(ep, ax1);
    for r in regions(dst.len_of(axp.nd())) {
        let a = shifted(eh.view(), axp, &r, 0, &zero);
        let b = shifted(eh.view(), axp, &r, -1, &zero);
        let c = shifted(el.view(), axp, &r, 0, &zero);
        let d = shifted(el.view(), axp, &r, -1, &zero);
        let out = dst.slice_axis_mut(axp.nd(), Slice::from(r.clone()));
        drive!(
            exec,
            Zip::from(out).and(&a).and(&b).and(&c).and(&d),
            |o, &a, &b, &c, &d| *o = *o + c3 * ((a - b) - (c - d))
        );
    }
}
