//! Data-driven differential inclusion built from one trajectory and side information.

use crate::interval::{IMatrix, ITensor3, IVector, Interval, IntervalError};
use crate::linalg::Mat;
use crate::scalar::Scalar;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KnowledgeError {
    #[error("sample {index} is inconsistent with the current enclosures ({what}, component {component})")]
    InconsistentSample {
        index: usize,
        component: usize,
        what: &'static str,
    },
    #[error("empty intersection of the over-approximation ({what}, component {component})")]
    EmptyIntersection { what: &'static str, component: usize },
    #[error("side information is inconsistent with the Lipschitz bounds: {0}")]
    InconsistentSideInfo(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// One measurement `(t, x, xdot, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub x: Vec<T>,
    pub xdot: Vec<T>,
    pub u: Vec<T>,
}

impl<T: Scalar> Sample<T> {
    pub fn new(t: T, x: Vec<T>, xdot: Vec<T>, u: Vec<T>) -> Self {
        Self { t, x, xdot, u }
    }
}

/// Upper bounds on the Lipschitz constants of each `f_k` and `G_{k,l}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzBounds<T> {
    lf: Vec<T>,
    lg: Mat<T>,
}

impl<T: Scalar> LipschitzBounds<T> {
    pub fn new(lf: Vec<T>, lg: Mat<T>) -> Result<Self, KnowledgeError> {
        if lg.rows() != lf.len() {
            return Err(KnowledgeError::Dimension(format!(
                "L_G has {} rows, L_f has {} entries",
                lg.rows(),
                lf.len()
            )));
        }
        let bad = lf.iter().chain(lg.as_slice()).any(|v| !(*v >= T::zero()) || !v.is_finite());
        if bad {
            return Err(KnowledgeError::Dimension("Lipschitz bounds must be finite and nonnegative".into()));
        }
        Ok(Self { lf, lg })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            lf: vec![T::zero(); n],
            lg: Mat::zeros(n, m),
        }
    }

    pub fn n(&self) -> usize {
        self.lf.len()
    }

    pub fn m(&self) -> usize {
        self.lg.cols()
    }

    pub fn lf(&self) -> &[T] {
        &self.lf
    }

    pub fn lg(&self) -> &Mat<T> {
        &self.lg
    }
}

/// Enclosures `(f(x), G(x))` attached to a data point.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeEntry<T> {
    pub x: Vec<T>,
    pub cf: IVector<T>,
    pub cg: IMatrix<T>,
}

/// Ranges of `f` and `G` valid over a state region.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldBounds<T> {
    pub region: IVector<T>,
    pub rf: IVector<T>,
    pub rg: IMatrix<T>,
}

/// Per-entry bounds on Jacobian components, optionally restricted to a region.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradientBounds<T> {
    pub region: Option<IVector<T>>,
    /// `(k, p, bound)` on `d f_k / d x_p`.
    pub jf: Vec<(usize, usize, Interval<T>)>,
    /// `(k, l, p, bound)` on `d G_{k,l} / d x_p`.
    pub jg: Vec<(usize, usize, usize, Interval<T>)>,
}

/// Dependency masks: `true` means the component may depend on the state variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoupling {
    n: usize,
    m: usize,
    f_dep: Vec<bool>,
    g_dep: Vec<bool>,
}

impl Decoupling {
    /// Everything may depend on everything.
    pub fn full(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            f_dep: vec![true; n * n],
            g_dep: vec![true; n * m * n],
        }
    }

    /// `f` may depend only on `f_vars` and `G` only on `g_vars`, for every component.
    pub fn uniform(n: usize, m: usize, f_vars: &[usize], g_vars: &[usize]) -> Self {
        let mut d = Self::full(n, m);
        for k in 0..n {
            for p in 0..n {
                d.f_dep[k * n + p] = f_vars.contains(&p);
                for l in 0..m {
                    d.g_dep[(k * m + l) * n + p] = g_vars.contains(&p);
                }
            }
        }
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn f_depends(&self, k: usize, p: usize) -> bool {
        self.f_dep[k * self.n + p]
    }

    pub fn g_depends(&self, k: usize, l: usize, p: usize) -> bool {
        self.g_dep[(k * self.m + l) * self.n + p]
    }

    pub fn set_f(&mut self, k: usize, p: usize, dep: bool) {
        self.f_dep[k * self.n + p] = dep;
    }

    pub fn set_g(&mut self, k: usize, l: usize, p: usize, dep: bool) {
        self.g_dep[(k * self.m + l) * self.n + p] = dep;
    }
}

/// Enclosures of `f`, `G` and their Jacobians over a state box.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosures<T> {
    pub f: IVector<T>,
    pub g: IMatrix<T>,
    pub jf: IMatrix<T>,
    pub jg: ITensor3<T>,
}

/// User-supplied contractor that may shrink enclosures given a state box and control box.
pub trait Contractor<T>: Send + Sync {
    fn contract(&self, state: &IVector<T>, control: &IVector<T>, enc: &mut Enclosures<T>);
}

/// Known part of the dynamics with interval extensions of values and Jacobians.
pub trait KnownDynamics<T>: Send + Sync {
    fn f(&self, x: &IVector<T>) -> IVector<T>;
    fn g(&self, x: &IVector<T>) -> IMatrix<T>;
    fn jf(&self, x: &IVector<T>) -> IMatrix<T>;
    fn jg(&self, x: &IVector<T>) -> ITensor3<T>;
}

/// Known part `f_kn(x) = A x`, `G_kn(x) = B` with constant `A`, `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearKnown<T> {
    pub a: Mat<T>,
    pub b: Mat<T>,
}

impl<T: Scalar> KnownDynamics<T> for LinearKnown<T> {
    fn f(&self, x: &IVector<T>) -> IVector<T> {
        let a = IMatrix::from_points(self.a.rows(), self.a.cols(), self.a.as_slice()).expect("shape");
        a.mul_vec(x).expect("known dynamics shape")
    }

    fn g(&self, _x: &IVector<T>) -> IMatrix<T> {
        IMatrix::from_points(self.b.rows(), self.b.cols(), self.b.as_slice()).expect("shape")
    }

    fn jf(&self, _x: &IVector<T>) -> IMatrix<T> {
        IMatrix::from_points(self.a.rows(), self.a.cols(), self.a.as_slice()).expect("shape")
    }

    fn jg(&self, _x: &IVector<T>) -> ITensor3<T> {
        ITensor3::zeros(self.b.rows(), self.b.cols(), self.a.cols())
    }
}

/// Decomposition `f = f_kn + f_ukn`, `G = G_kn + G_ukn` with the unknown residual learned from data.
#[derive(Clone)]
pub struct PartialDynamics<T> {
    pub known: Arc<dyn KnownDynamics<T>>,
    pub residual_lip: LipschitzBounds<T>,
    /// Global range of `f_ukn` over the domain; defaults to `[-M, M]`.
    pub residual_f_range: Option<IVector<T>>,
    /// Global range of `G_ukn` over the domain; defaults to `[-M, M]`.
    pub residual_g_range: Option<IMatrix<T>>,
}

impl<T> fmt::Debug for PartialDynamics<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialDynamics").finish_non_exhaustive()
    }
}

/// Optional side information beyond the Lipschitz bounds.
#[derive(Clone, Default)]
pub struct SideInfoSet<T> {
    pub vf_bounds: Option<VectorFieldBounds<T>>,
    pub grad_bounds: Option<GradientBounds<T>>,
    pub decoupling: Option<Decoupling>,
    pub contractor: Option<Arc<dyn Contractor<T>>>,
    pub partial: Option<PartialDynamics<T>>,
}

impl<T> fmt::Debug for SideInfoSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SideInfoSet")
            .field("vf_bounds", &self.vf_bounds.is_some())
            .field("grad_bounds", &self.grad_bounds.is_some())
            .field("decoupling", &self.decoupling.is_some())
            .field("contractor", &self.contractor.is_some())
            .field("partial", &self.partial.is_some())
            .finish()
    }
}

/// Tunables of the knowledge construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnowledgeConfig<T> {
    /// Bound `M` on `|f|` and `|G|` over the domain when no tighter range is known.
    pub m_bound: T,
    pub fixpoint_tol: T,
    pub max_fixpoint_iters: usize,
    /// Largest gap between intervals treated as floating-point noise rather than inconsistency.
    pub consistency_tol: T,
    /// Outward widening added to every query result.
    pub inflate_eps: T,
}

impl<T: Scalar> Default for KnowledgeConfig<T> {
    fn default() -> Self {
        Self {
            m_bound: T::of(1e3),
            fixpoint_tol: T::of(1e-9),
            max_fixpoint_iters: 50,
            consistency_tol: T::of(1e-9),
            inflate_eps: T::zero(),
        }
    }
}

/// Enclosures of `f` and `G` at every data point plus the side information to query them.
#[derive(Debug, Clone)]
pub struct KnowledgeBase<T> {
    n: usize,
    m: usize,
    domain: IVector<T>,
    lip: LipschitzBounds<T>,
    side: SideInfoSet<T>,
    cfg: KnowledgeConfig<T>,
    seed: KnowledgeEntry<T>,
    range_region: IVector<T>,
    entries: Vec<KnowledgeEntry<T>>,
    samples: Vec<Option<Sample<T>>>,
    passes: usize,
    /// Distinct variable sets used for distances, and the set index of every `f_k` and `G_kl`.
    dist_vars: Vec<Vec<usize>>,
    f_group: Vec<usize>,
    g_group: Vec<usize>,
}

/// Variable sets each learned component may depend on, deduplicated.
fn distance_groups<T: Scalar>(
    n: usize,
    m: usize,
    side: &SideInfoSet<T>,
    domain: &IVector<T>,
) -> (Vec<Vec<usize>>, Vec<usize>, Vec<usize>) {
    let known = side.partial.as_ref().map(|p| (p.known.jf(domain), p.known.jg(domain)));
    let touches = |iv: Interval<T>| !(iv.lo() == T::zero() && iv.hi() == T::zero());
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of = |vars: Vec<usize>| match groups.iter().position(|g| *g == vars) {
        Some(i) => i,
        None => {
            groups.push(vars);
            groups.len() - 1
        }
    };
    let mut f_group = Vec::with_capacity(n);
    let mut g_group = Vec::with_capacity(n * m);
    for k in 0..n {
        let vars = (0..n)
            .filter(|&p| {
                side.decoupling.as_ref().is_none_or(|d| d.f_depends(k, p))
                    || known.as_ref().is_some_and(|(jf, _)| touches(jf.get(k, p)))
            })
            .collect();
        f_group.push(index_of(vars));
    }
    for k in 0..n {
        for l in 0..m {
            let vars = (0..n)
                .filter(|&p| {
                    side.decoupling.as_ref().is_none_or(|d| d.g_depends(k, l, p))
                        || known.as_ref().is_some_and(|(_, jg)| touches(jg.get(k, l, p)))
                })
                .collect();
            g_group.push(index_of(vars));
        }
    }
    (groups, f_group, g_group)
}

fn gap_tol<T: Scalar>(tol: T, a: &Interval<T>, b: &Interval<T>) -> T {
    tol * (T::one() + a.abs().max(b.abs()))
}

/// Contraction of `(F, G)` against one sample.
pub fn contract_fg<T: Scalar>(
    s: &Sample<T>,
    f: &IVector<T>,
    g: &IMatrix<T>,
) -> Result<(IVector<T>, IMatrix<T>), KnowledgeError> {
    contract_fg_tol(s, f, g, T::zero()).map_err(|(component, what)| KnowledgeError::InconsistentSample {
        index: 0,
        component,
        what,
    })
}

fn contract_fg_tol<T: Scalar>(
    s: &Sample<T>,
    f: &IVector<T>,
    g: &IMatrix<T>,
    tol: T,
) -> Result<(IVector<T>, IMatrix<T>), (usize, &'static str)> {
    let n = f.len();
    let m = s.u.len();
    assert!(g.rows() == n && g.cols() == m && s.x.len() == n && s.xdot.len() == n, "sample shape");
    let meet = |a: &Interval<T>, b: &Interval<T>| a.intersect_tol(b, gap_tol(tol, a, b));
    let mut cf = f.clone();
    let mut cg = g.clone();
    for k in 0..n {
        let xd = Interval::point(s.xdot[k]);
        // suffix[l] = sum_{p >= l} G_{k,p} u_p
        let mut suffix = vec![Interval::zero(); m + 1];
        for l in (0..m).rev() {
            suffix[l] = suffix[l + 1] + g.get(k, l) * s.u[l];
        }
        cf[k] = meet(&f[k], &(xd - suffix[0])).ok_or((k, "f"))?;
        let mut sl = meet(&(xd - cf[k]), &suffix[0]).ok_or((k, "f"))?;
        for l in 0..m {
            let ul = s.u[l];
            let gu = g.get(k, l) * ul;
            if ul != T::zero() {
                let t = meet(&(sl - suffix[l + 1]), &gu).ok_or((k, "G"))?;
                let c = t.div_scalar(ul);
                let c = meet(&c, &g.get(k, l)).ok_or((k, "G"))?;
                cg.set(k, l, c);
            }
            sl = meet(&(sl - cg.get(k, l) * ul), &suffix[l + 1]).ok_or((k, "G"))?;
        }
    }
    Ok((cf, cg))
}

impl<T: Scalar> KnowledgeBase<T> {
    /// Empty base over `domain`; only the seed entry is present.
    pub fn empty(
        lip: LipschitzBounds<T>,
        side: SideInfoSet<T>,
        domain: IVector<T>,
        cfg: KnowledgeConfig<T>,
    ) -> Result<Self, KnowledgeError> {
        let n = lip.n();
        let m = lip.m();
        if domain.len() != n {
            return Err(KnowledgeError::Dimension(format!("domain has {} components, expected {n}", domain.len())));
        }
        let mb = Interval::symmetric(cfg.m_bound);
        let (range_region, rf, rg) = match &side.partial {
            Some(p) => {
                if p.residual_lip.n() != n || p.residual_lip.m() != m {
                    return Err(KnowledgeError::Dimension("residual Lipschitz bounds shape".into()));
                }
                (
                    domain.clone(),
                    p.residual_f_range.clone().unwrap_or_else(|| IVector::filled(n, mb)),
                    p.residual_g_range.clone().unwrap_or_else(|| IMatrix::filled(n, m, mb)),
                )
            }
            None => match &side.vf_bounds {
                Some(vf) => (vf.region.clone(), vf.rf.clone(), vf.rg.clone()),
                None => (domain.clone(), IVector::filled(n, mb), IMatrix::filled(n, m, mb)),
            },
        };
        if rf.len() != n || rg.rows() != n || rg.cols() != m || range_region.len() != n {
            return Err(KnowledgeError::Dimension("vector-field range shape".into()));
        }
        if let Some(d) = &side.decoupling {
            if d.n() != n || d.m() != m {
                return Err(KnowledgeError::Dimension("decoupling mask shape".into()));
            }
        }
        let (dist_vars, f_group, g_group) = distance_groups(n, m, &side, &domain);
        let seed = KnowledgeEntry {
            x: range_region.mid(),
            cf: rf,
            cg: rg,
        };
        Ok(Self {
            n,
            m,
            domain,
            lip,
            side,
            cfg,
            seed,
            range_region,
            entries: Vec::new(),
            samples: Vec::new(),
            passes: 0,
            dist_vars,
            f_group,
            g_group,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> &IVector<T> {
        &self.domain
    }

    /// Lipschitz bounds of the full vector field.
    pub fn lip(&self) -> &LipschitzBounds<T> {
        &self.lip
    }

    pub fn side(&self) -> &SideInfoSet<T> {
        &self.side
    }

    pub fn config(&self) -> &KnowledgeConfig<T> {
        &self.cfg
    }

    /// Data entries (the synthetic seed entry is not included).
    pub fn entries(&self) -> &[KnowledgeEntry<T>] {
        &self.entries
    }

    pub fn seed_entry(&self) -> &KnowledgeEntry<T> {
        &self.seed
    }

    /// Samples as stored (residual samples when partial dynamics are known).
    pub fn samples(&self) -> impl Iterator<Item = &Sample<T>> {
        self.samples.iter().flatten()
    }

    /// Inserts a precomputed entry; it takes part in queries but is never re-contracted.
    pub fn insert_entry(&mut self, e: KnowledgeEntry<T>) -> Result<(), KnowledgeError> {
        if e.x.len() != self.n || e.cf.len() != self.n || e.cg.rows() != self.n || e.cg.cols() != self.m {
            return Err(KnowledgeError::Dimension("entry shape".into()));
        }
        self.entries.push(e);
        self.samples.push(None);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of full passes run by the last fixpoint refresh.
    pub fn passes(&self) -> usize {
        self.passes
    }

    fn learned_lip(&self) -> &LipschitzBounds<T> {
        match &self.side.partial {
            Some(p) => &p.residual_lip,
            None => &self.lip,
        }
    }

    fn check_sample(&self, s: &Sample<T>) -> Result<(), KnowledgeError> {
        if s.x.len() != self.n || s.xdot.len() != self.n || s.u.len() != self.m {
            return Err(KnowledgeError::Dimension(format!(
                "sample shapes ({}, {}, {}) do not match (n={}, m={})",
                s.x.len(),
                s.xdot.len(),
                s.u.len(),
                self.n,
                self.m
            )));
        }
        Ok(())
    }

    fn to_residual(&self, s: &Sample<T>) -> Sample<T> {
        match &self.side.partial {
            None => s.clone(),
            Some(p) => {
                let xb = IVector::from_point(&s.x);
                let fk = p.known.f(&xb).mid();
                let gk = p.known.g(&xb).mid();
                let xdot = (0..self.n)
                    .map(|k| {
                        let gu: T = (0..self.m).map(|l| gk[k * self.m + l] * s.u[l]).sum();
                        s.xdot[k] - fk[k] - gu
                    })
                    .collect();
                Sample::new(s.t, s.x.clone(), xdot, s.u.clone())
            }
        }
    }

    /// Lipschitz-interpolated intersection for the learned part over the entries `0..upto` plus the seed.
    fn learned_over(&self, x: &IVector<T>, upto: usize) -> Result<(IVector<T>, IMatrix<T>), KnowledgeError> {
        let n = self.n;
        let m = self.m;
        let lip = self.learned_lip();
        let tol = self.cfg.consistency_tol;
        let in_region = x.subset_of(&self.range_region);
        let mut f_lo = vec![T::neg_infinity(); n];
        let mut f_hi = vec![T::infinity(); n];
        let mut g_lo = vec![T::neg_infinity(); n * m];
        let mut g_hi = vec![T::infinity(); n * m];
        let mut sq = vec![T::zero(); n];
        let mut d = vec![T::zero(); self.dist_vars.len()];
        let mut absorb = |e: &KnowledgeEntry<T>, spread: bool| {
            if spread {
                for p in 0..n {
                    let r = (x[p].lo() - e.x[p]).abs().max((x[p].hi() - e.x[p]).abs());
                    sq[p] = r * r;
                }
                for (dg, vars) in d.iter_mut().zip(&self.dist_vars) {
                    *dg = vars.iter().map(|&p| sq[p]).sum::<T>().sqrt();
                }
            } else {
                d.iter_mut().for_each(|v| *v = T::zero());
            }
            for k in 0..n {
                let r = lip.lf()[k] * d[self.f_group[k]];
                f_lo[k] = f_lo[k].max(e.cf[k].lo() - r);
                f_hi[k] = f_hi[k].min(e.cf[k].hi() + r);
                for l in 0..m {
                    let r = lip.lg().get(k, l) * d[self.g_group[k * m + l]];
                    let c = e.cg.get(k, l);
                    g_lo[k * m + l] = g_lo[k * m + l].max(c.lo() - r);
                    g_hi[k * m + l] = g_hi[k * m + l].min(c.hi() + r);
                }
            }
        };
        absorb(&self.seed, true);
        if in_region {
            absorb(&self.seed, false);
        }
        for e in &self.entries[..upto] {
            absorb(e, true);
        }
        let close = |lo: T, hi: T, what: &'static str, component: usize| -> Result<Interval<T>, KnowledgeError> {
            if lo <= hi {
                Ok(Interval::new(lo, hi)?)
            } else if lo - hi <= tol * (T::one() + lo.abs().max(hi.abs())) {
                Ok(Interval::new(hi, lo)?)
            } else {
                Err(KnowledgeError::EmptyIntersection { what, component })
            }
        };
        let f = (0..n)
            .map(|k| close(f_lo[k], f_hi[k], "f", k))
            .collect::<Result<IVector<T>, _>>()?;
        let mut g = IMatrix::zeros(n, m);
        for k in 0..n {
            for l in 0..m {
                g.set(k, l, close(g_lo[k * m + l], g_hi[k * m + l], "G", k)?);
            }
        }
        Ok((f, g))
    }

    /// Full enclosures of `f` and `G` over a state box (learned part, known part and ranges).
    pub fn fg_over_iv(&self, x: &IVector<T>) -> Result<(IVector<T>, IMatrix<T>), KnowledgeError> {
        if x.len() != self.n {
            return Err(KnowledgeError::Dimension(format!("query box has {} components", x.len())));
        }
        let (mut f, mut g) = self.learned_over(x, self.entries.len())?;
        if let Some(p) = &self.side.partial {
            f = &f + &p.known.f(x);
            g = g.add(&p.known.g(x))?;
            if let Some(vf) = &self.side.vf_bounds {
                if x.subset_of(&vf.region) {
                    f = meet_vec(&f, &vf.rf, self.cfg.consistency_tol, "f")?;
                    g = meet_mat(&g, &vf.rg, self.cfg.consistency_tol)?;
                }
            }
        }
        let eps = self.cfg.inflate_eps;
        if eps > T::zero() {
            f = f.inflate(eps);
            g = g.map(|iv| iv.inflate(eps));
        }
        Ok((f, g))
    }

    pub fn f_over_iv(&self, x: &IVector<T>) -> Result<IVector<T>, KnowledgeError> {
        Ok(self.fg_over_iv(x)?.0)
    }

    pub fn g_over_iv(&self, x: &IVector<T>) -> Result<IMatrix<T>, KnowledgeError> {
        Ok(self.fg_over_iv(x)?.1)
    }

    pub fn f_over(&self, x: &[T]) -> Result<IVector<T>, KnowledgeError> {
        self.f_over_iv(&IVector::from_point(x))
    }

    pub fn g_over(&self, x: &[T]) -> Result<IMatrix<T>, KnowledgeError> {
        self.g_over_iv(&IVector::from_point(x))
    }

    fn contract_entry(&self, index: usize, s: &Sample<T>, upto: usize) -> Result<KnowledgeEntry<T>, KnowledgeError> {
        let xb = IVector::from_point(&s.x);
        let (f, g) = self
            .learned_over(&xb, upto)
            .map_err(|e| match e {
                KnowledgeError::EmptyIntersection { what, component } => {
                    KnowledgeError::InconsistentSample { index, component, what }
                }
                other => other,
            })?;
        let (cf, cg) = contract_fg_tol(s, &f, &g, self.cfg.consistency_tol)
            .map_err(|(component, what)| KnowledgeError::InconsistentSample { index, component, what })?;
        Ok(KnowledgeEntry { x: s.x.clone(), cf, cg })
    }

    /// Appends one sample: a single query on the current base and one contraction.
    pub fn add_sample(&mut self, s: Sample<T>) -> Result<(), KnowledgeError> {
        self.check_sample(&s)?;
        let r = self.to_residual(&s);
        let index = self.entries.len();
        let e = self.contract_entry(index, &r, index)?;
        self.entries.push(e);
        self.samples.push(Some(r));
        Ok(())
    }

    /// Re-runs contraction passes over all samples until no endpoint moves by more than the tolerance.
    pub fn refresh(&mut self) -> Result<(), KnowledgeError> {
        let total = self.entries.len();
        self.passes = 0;
        for _ in 0..self.cfg.max_fixpoint_iters {
            self.passes += 1;
            let mut change = T::zero();
            for i in 0..total {
                let Some(s) = self.samples[i].clone() else { continue };
                let e = self.contract_entry(i, &s, total)?;
                change = change.max(entry_change(&self.entries[i], &e));
                self.entries[i] = e;
            }
            if change < self.cfg.fixpoint_tol {
                break;
            }
        }
        Ok(())
    }

    /// Jacobian enclosures over an optional state box (defaults to the domain).
    pub fn jacobian_extensions(&self, state: Option<&IVector<T>>) -> Result<(IMatrix<T>, ITensor3<T>), KnowledgeError> {
        let n = self.n;
        let m = self.m;
        let lip = self.learned_lip();
        let mut jf = IMatrix::from_fn(n, n, |k, _| Interval::symmetric(lip.lf()[k]));
        let mut jg = ITensor3::from_fn(n, m, n, |k, l, _| Interval::symmetric(lip.lg().get(k, l)));
        if let Some(d) = &self.side.decoupling {
            for k in 0..n {
                for p in 0..n {
                    if !d.f_depends(k, p) {
                        jf.set(k, p, Interval::zero());
                    }
                    for l in 0..m {
                        if !d.g_depends(k, l, p) {
                            jg.set(k, l, p, Interval::zero());
                        }
                    }
                }
            }
        }
        let sbox = state.unwrap_or(&self.domain);
        if let Some(gb) = &self.side.grad_bounds {
            let applies = gb.region.as_ref().is_none_or(|r| sbox.subset_of(r));
            if applies {
                for &(k, p, b) in &gb.jf {
                    let v = jf.get(k, p).intersect(&b).ok_or_else(|| {
                        KnowledgeError::InconsistentSideInfo(format!("gradient bound on df_{k}/dx_{p}"))
                    })?;
                    jf.set(k, p, v);
                }
                for &(k, l, p, b) in &gb.jg {
                    let v = jg.get(k, l, p).intersect(&b).ok_or_else(|| {
                        KnowledgeError::InconsistentSideInfo(format!("gradient bound on dG_{k},{l}/dx_{p}"))
                    })?;
                    jg.set(k, l, p, v);
                }
            }
        }
        if let Some(p) = &self.side.partial {
            jf = jf.add(&p.known.jf(sbox))?;
            let jk = p.known.jg(sbox);
            jg = ITensor3::from_fn(n, m, n, |a, b, c| jg.get(a, b, c) + jk.get(a, b, c));
        }
        Ok((jf, jg))
    }

    /// Enclosures over `state`, with the contractor applied for controls in `control`.
    pub fn enclosures(&self, state: &IVector<T>, control: &IVector<T>) -> Result<Enclosures<T>, KnowledgeError> {
        let (f, g) = self.fg_over_iv(state)?;
        let (jf, jg) = self.jacobian_extensions(Some(state))?;
        let mut enc = Enclosures { f, g, jf, jg };
        if let Some(c) = &self.side.contractor {
            c.contract(state, control, &mut enc);
        }
        Ok(enc)
    }
}

fn meet_vec<T: Scalar>(a: &IVector<T>, b: &IVector<T>, tol: T, what: &'static str) -> Result<IVector<T>, KnowledgeError> {
    a.iter()
        .zip(b.iter())
        .enumerate()
        .map(|(k, (x, y))| {
            x.intersect_tol(y, gap_tol(tol, x, y))
                .ok_or(KnowledgeError::EmptyIntersection { what, component: k })
        })
        .collect()
}

fn meet_mat<T: Scalar>(a: &IMatrix<T>, b: &IMatrix<T>, tol: T) -> Result<IMatrix<T>, KnowledgeError> {
    let mut out = a.clone();
    for k in 0..a.rows() {
        for l in 0..a.cols() {
            let (x, y) = (a.get(k, l), b.get(k, l));
            let v = x
                .intersect_tol(&y, gap_tol(tol, &x, &y))
                .ok_or(KnowledgeError::EmptyIntersection { what: "G", component: k })?;
            out.set(k, l, v);
        }
    }
    Ok(out)
}

fn entry_change<T: Scalar>(a: &KnowledgeEntry<T>, b: &KnowledgeEntry<T>) -> T {
    let d = |x: &Interval<T>, y: &Interval<T>| (x.lo() - y.lo()).abs().max((x.hi() - y.hi()).abs());
    let f = a.cf.iter().zip(b.cf.iter()).map(|(x, y)| d(x, y)).fold(T::zero(), T::max);
    let g = a
        .cg
        .entries()
        .iter()
        .zip(b.cg.entries())
        .map(|(x, y)| d(x, y))
        .fold(T::zero(), T::max);
    f.max(g)
}

/// Seed entry, forward contraction pass, then repeated passes to a fixed point.
pub fn build_knowledge<T: Scalar>(
    traj: &[Sample<T>],
    lip: LipschitzBounds<T>,
    side: SideInfoSet<T>,
    domain: IVector<T>,
    cfg: KnowledgeConfig<T>,
) -> Result<KnowledgeBase<T>, KnowledgeError> {
    let mut kb = KnowledgeBase::empty(lip, side, domain, cfg)?;
    for s in traj {
        kb.add_sample(s.clone())?;
    }
    kb.refresh()?;
    Ok(kb)
}

/// Interpolated queries as free functions.
pub fn f_over<T: Scalar>(x: &[T], kb: &KnowledgeBase<T>) -> Result<IVector<T>, KnowledgeError> {
    kb.f_over(x)
}

pub fn g_over<T: Scalar>(x: &[T], kb: &KnowledgeBase<T>) -> Result<IMatrix<T>, KnowledgeError> {
    kb.g_over(x)
}

pub fn f_over_iv<T: Scalar>(x: &IVector<T>, kb: &KnowledgeBase<T>) -> Result<IVector<T>, KnowledgeError> {
    kb.f_over_iv(x)
}

pub fn g_over_iv<T: Scalar>(x: &IVector<T>, kb: &KnowledgeBase<T>) -> Result<IMatrix<T>, KnowledgeError> {
    kb.g_over_iv(x)
}

pub fn jacobian_extensions<T: Scalar>(
    kb: &KnowledgeBase<T>,
    state: Option<&IVector<T>>,
) -> Result<(IMatrix<T>, ITensor3<T>), KnowledgeError> {
    kb.jacobian_extensions(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval<f64> {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn exact_identification_one_dim() {
        let s = Sample::new(0.0, vec![0.0], vec![2.0], vec![1.0]);
        let f = IVector::new(vec![iv(0.0, 0.0)]);
        let g = IMatrix::filled(1, 1, iv(0.0, 5.0));
        let (cf, cg) = contract_fg(&s, &f, &g).unwrap();
        assert_eq!(cf[0], iv(0.0, 0.0));
        assert_eq!(cg.get(0, 0), iv(2.0, 2.0));
    }

    #[test]
    fn zero_control_keeps_g() {
        let s = Sample::new(0.0, vec![0.0, 0.0], vec![0.5, -1.0], vec![0.0]);
        let f = IVector::filled(2, iv(-3.0, 3.0));
        let g = IMatrix::filled(2, 1, iv(-1.0, 2.0));
        let (cf, cg) = contract_fg(&s, &f, &g).unwrap();
        assert_eq!(cf, IVector::new(vec![iv(0.5, 0.5), iv(-1.0, -1.0)]));
        assert_eq!(cg, g);
    }

    #[test]
    fn inconsistent_sample_is_reported() {
        let s = Sample::new(0.0, vec![0.0], vec![10.0], vec![1.0]);
        let f = IVector::new(vec![iv(0.0, 1.0)]);
        let g = IMatrix::filled(1, 1, iv(0.0, 1.0));
        assert!(matches!(contract_fg(&s, &f, &g), Err(KnowledgeError::InconsistentSample { .. })));
    }
}
