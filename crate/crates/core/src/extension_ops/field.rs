use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::domain::Point;
use crate::jet::Jet2;

/// `[xmin, xmax, ymin, ymax]`.
pub type BBox = [f64; 4];

pub trait Field2d: Send + Sync {
    fn jet(&self, p: Point) -> Jet2;
    fn support_box(&self) -> BBox;
}

/// Shared, immutable, compactly supported `C²` field with analytic jets.
#[derive(Clone)]
pub struct ExtensionField {
    inner: Arc<dyn Field2d>,
    bbox: BBox,
}

impl core::fmt::Debug for ExtensionField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "ExtensionField(support {:?})", self.bbox)
    }
}

struct FnField<F> {
    f: F,
    bbox: BBox,
}

impl<F: Fn(Point) -> Jet2 + Send + Sync> Field2d for FnField<F> {
    fn jet(&self, p: Point) -> Jet2 {
        (self.f)(p)
    }
    fn support_box(&self) -> BBox {
        self.bbox
    }
}

const EMPTY: BBox = [0.0, 0.0, 0.0, 0.0];

fn is_empty(b: &BBox) -> bool {
    !(b[0] < b[1] && b[2] < b[3])
}

fn hull(a: BBox, b: BBox) -> BBox {
    if is_empty(&a) {
        return b;
    }
    if is_empty(&b) {
        return a;
    }
    [a[0].min(b[0]), a[1].max(b[1]), a[2].min(b[2]), a[3].max(b[3])]
}

fn intersect(a: BBox, b: BBox) -> BBox {
    let r = [a[0].max(b[0]), a[1].min(b[1]), a[2].max(b[2]), a[3].min(b[3])];
    if is_empty(&r) {
        EMPTY
    } else {
        r
    }
}

impl ExtensionField {
    pub fn new<F: Field2d + 'static>(f: F) -> Self {
        let bbox = f.support_box();
        Self { inner: Arc::new(f), bbox }
    }

    pub fn from_fn(bbox: BBox, f: impl Fn(Point) -> Jet2 + Send + Sync + 'static) -> Self {
        Self::new(FnField { f, bbox })
    }

    pub fn zero() -> Self {
        Self::from_fn(EMPTY, |_| Jet2::ZERO)
    }

    /// Separable product `a(x)·b(y)` of 1D profiles with known supports.
    pub fn separable(
        xs: (f64, f64),
        ys: (f64, f64),
        a: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static,
        b: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        Self::from_fn([xs.0, xs.1, ys.0, ys.1], move |p| Jet2::of_x(a(p[0])).mul(Jet2::of_y(b(p[1]))))
    }

    pub fn support_box(&self) -> BBox {
        self.bbox
    }

    /// Jet at `p`; exactly zero outside the support box.
    #[inline]
    pub fn jet(&self, p: Point) -> Jet2 {
        let b = &self.bbox;
        if is_empty(b) || p[0] < b[0] || p[0] > b[1] || p[1] < b[2] || p[1] > b[3] {
            return Jet2::ZERO;
        }
        self.inner.jet(p)
    }

    pub fn value(&self, p: Point) -> f64 {
        self.jet(p).v
    }

    pub fn add(&self, o: &ExtensionField) -> Self {
        if is_empty(&o.bbox) {
            return self.clone();
        }
        if is_empty(&self.bbox) {
            return o.clone();
        }
        let (a, b) = (self.clone(), o.clone());
        Self::from_fn(hull(self.bbox, o.bbox), move |p| a.jet(p) + b.jet(p))
    }

    pub fn sub(&self, o: &ExtensionField) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn sum(fields: &[ExtensionField]) -> Self {
        let live: Vec<ExtensionField> = fields.iter().filter(|f| !is_empty(&f.bbox)).cloned().collect();
        if live.is_empty() {
            return Self::zero();
        }
        let bbox = live.iter().fold(EMPTY, |acc, f| hull(acc, f.bbox));
        Self::from_fn(bbox, move |p| live.iter().fold(Jet2::ZERO, |acc, f| acc + f.jet(p)))
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        let a = self.clone();
        Self::from_fn(self.bbox, move |p| a.jet(p) * s)
    }

    /// Pointwise product.
    pub fn mul(&self, o: &ExtensionField) -> Self {
        let bbox = intersect(self.bbox, o.bbox);
        if is_empty(&bbox) {
            return Self::zero();
        }
        let (a, b) = (self.clone(), o.clone());
        Self::from_fn(bbox, move |p| a.jet(p).mul(b.jet(p)))
    }

    /// `(x, y) ↦ w(y, x)`.
    pub fn swap_xy(&self) -> Self {
        let a = self.clone();
        let b = self.bbox;
        Self::from_fn([b[2], b[3], b[0], b[1]], move |p| a.jet([p[1], p[0]]).swap_xy())
    }

    /// `p ↦ w(M (p − o))`, with `M` row-major and invertible.
    pub fn pullback_affine(&self, m: [[f64; 2]; 2], o: Point) -> Self {
        if is_empty(&self.bbox) {
            return Self::zero();
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let b = self.bbox;
        let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for q in [[b[0], b[2]], [b[0], b[3]], [b[1], b[2]], [b[1], b[3]]] {
            let x = o[0] + inv[0][0] * q[0] + inv[0][1] * q[1];
            let y = o[1] + inv[1][0] * q[0] + inv[1][1] * q[1];
            bb = [bb[0].min(x), bb[1].max(x), bb[2].min(y), bb[3].max(y)];
        }
        let a = self.clone();
        Self::from_fn(bb, move |p| {
            let d = [p[0] - o[0], p[1] - o[1]];
            let q = [m[0][0] * d[0] + m[0][1] * d[1], m[1][0] * d[0] + m[1][1] * d[1]];
            a.jet(q).pullback_linear(m)
        })
    }

    /// Pullback through a general chart `Ψ` given as `p ↦ (Ψ(p), DΨ, [D²Ψ₁, D²Ψ₂])`
    /// with Hessians stored `[xx, xy, yy]`; `bbox` bounds the preimage of the support.
    pub fn pullback_chart(
        &self,
        bbox: BBox,
        chart: impl Fn(Point) -> (Point, [[f64; 2]; 2], [[f64; 3]; 2]) + Send + Sync + 'static,
    ) -> Self {
        let a = self.clone();
        Self::from_fn(bbox, move |p| {
            let (q, jm, hs) = chart(p);
            let w = a.jet(q);
            let mut out = w.pullback_linear(jm);
            for k in 0..3 {
                out.h[k] += w.g[0] * hs[0][k] + w.g[1] * hs[1][k];
            }
            out
        })
    }

    /// Restricts the reported support box; the caller asserts the field vanishes outside.
    pub fn clip(&self, bbox: BBox) -> Self {
        Self { inner: self.inner.clone(), bbox: intersect(self.bbox, bbox) }
    }
}
