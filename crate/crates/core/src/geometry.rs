//! Polyhedral structure of the substitute valuations on three and four goods.
//!
//! On three goods the substitute valuations split into three polyhedrons, one
//! for each good `i` with `δ_ij = δ_ik`. On four goods the pairwise `δ`'s
//! follow one of two patterns on the complete graph:
//!
//! * **Case 1**: all three edges at `i` carry the minimum `a`, and on the
//!   triangle `jkl` the edges at `j` carry `b ≤ c = δ_kl`;
//! * **Case 2**: the four-cycle `i–j–k–l` carries `a`, with `δ_ik = b`,
//!   `δ_jl = c`.
//!
//! The triple condition at the singletons then pins down which two of the
//! three `δ_{pq|x}` are minimal in each row `x`; these "box" patterns give the
//! five subcases of each case. Descriptors are generated from those patterns
//! and deduplicated by comparing canonical forms of their constraint systems.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bundle::Bundle;
use crate::checks::is_substitute;
use crate::error::{Error, Result};
use crate::rank::{affine_dimension, rank};
use crate::valuation::{delta, from_interaction, InteractionFunction, Valuation};
use crate::value::Value;

/// Number of table coordinates of a valuation on four goods.
pub const COORDS: usize = 16;

// ---------------------------------------------------------------------------
// Three goods
// ---------------------------------------------------------------------------

/// Parameters of a valuation on three goods: `θ(ij) = θ(ik) = a`,
/// `θ(jk) = b`, `θ(ijk) = c` for the permutation `(i, j, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K3Params {
    /// Goods playing the roles `(i, j, k)`, 0-based.
    pub perm: [usize; 3],
    pub a: Value,
    pub b: Value,
    pub c: Value,
    /// Indexed by good.
    pub mu: [Value; 3],
}

impl K3Params {
    /// Checks `0 ≤ a ≤ b`, `a + b ≤ c`, `μ_i ≥ c − b`, `μ_j, μ_k ≥ c − a`.
    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 3];
        for &g in &self.perm {
            if g >= 3 || std::mem::replace(&mut seen[g], true) {
                return Err(Error::InvalidArgument(format!(
                    "{:?} is not a permutation of the three goods",
                    self.perm
                )));
            }
        }
        let [i, j, k] = self.perm;
        let fail = |what: &str| Err(Error::Precondition(what.to_string()));
        if self.a.is_negative() {
            return fail("a >= 0");
        }
        if self.a > self.b {
            return fail("a <= b");
        }
        if self.a.checked_add(self.b)? > self.c {
            return fail("a + b <= c");
        }
        if self.mu[i] < self.c.checked_sub(self.b)? {
            return fail("mu_i >= c - b");
        }
        let ca = self.c.checked_sub(self.a)?;
        if self.mu[j] < ca || self.mu[k] < ca {
            return fail("mu_j, mu_k >= c - a");
        }
        Ok(())
    }
}

/// The valuation `v(A) = μ·A − θ(A)` described by validated parameters.
pub fn k3_valuation(p: &K3Params) -> Result<Valuation> {
    p.validate()?;
    let [i, j, k] = p.perm;
    let mut theta = vec![Value::ZERO; 8];
    theta[Bundle::from_goods([i, j]).index()] = p.a;
    theta[Bundle::from_goods([i, k]).index()] = p.a;
    theta[Bundle::from_goods([j, k]).index()] = p.b;
    theta[Bundle::full(3).index()] = p.c;
    from_interaction(&InteractionFunction::new(3, theta, p.mu.to_vec())?)
}

/// One of the three maximal polyhedrons on three goods: the substitute
/// valuations with `δ_{pivot,j} = δ_{pivot,k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct K3Polyhedron {
    pub pivot: usize,
}

impl K3Polyhedron {
    /// The two edges compared, each as a sorted pair of goods.
    pub fn edges(self) -> [(usize, usize); 2] {
        let others: Vec<usize> = (0..3).filter(|&g| g != self.pivot).collect();
        let edge = |g: usize| (self.pivot.min(g), self.pivot.max(g));
        let mut e = [edge(others[0]), edge(others[1])];
        e.sort();
        e
    }
}

impl fmt::Display for K3Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [(p, q), (r, s)] = self.edges();
        write!(f, "δ{}{}=δ{}{}", p + 1, q + 1, r + 1, s + 1)
    }
}

fn require_substitute(v: &Valuation, goods: usize) -> Result<()> {
    if v.goods() != goods {
        return Err(Error::GoodsMismatch { left: goods, right: v.goods() });
    }
    if !is_substitute(v)? {
        return Err(Error::NotSubstitute);
    }
    Ok(())
}

/// All polyhedrons on three goods containing `v`, ordered by pivot.
pub fn classify_k3(v: &Valuation) -> Result<Vec<K3Polyhedron>> {
    require_substitute(v, 3)?;
    let mut out = Vec::new();
    for pivot in 0..3 {
        let poly = K3Polyhedron { pivot };
        let [(p, q), (r, s)] = poly.edges();
        if delta(v, p, q, Bundle::EMPTY)? == delta(v, r, s, Bundle::EMPTY)? {
            out.push(poly);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Linear forms over the 16 coordinates
// ---------------------------------------------------------------------------

/// Integer linear form `Σ c_A · v(A)` over the table of a valuation on four
/// goods.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearForm([i64; COORDS]);

impl LinearForm {
    fn zero() -> Self {
        LinearForm([0; COORDS])
    }

    fn coord(b: Bundle) -> Self {
        let mut f = LinearForm::zero();
        f.0[b.index()] = 1;
        f
    }

    fn add(mut self, other: &LinearForm, sign: i64) -> Self {
        for (x, y) in self.0.iter_mut().zip(other.0) {
            *x += sign * y;
        }
        self
    }

    pub fn coeffs(&self) -> &[i64; COORDS] {
        &self.0
    }

    pub fn eval(&self, v: &Valuation) -> Result<Value> {
        if v.goods() != 4 {
            return Err(Error::GoodsMismatch { left: 4, right: v.goods() });
        }
        let terms = self
            .0
            .iter()
            .zip(v.table())
            .filter(|(c, _)| **c != 0)
            .map(|(&c, &x)| Value::int(c).checked_mul(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Value::sum(terms)?)
    }
}

/// Named linear expression, used to build readable constraint labels.
#[derive(Clone, Debug)]
struct Expr {
    name: String,
    form: LinearForm,
}

/// `δ_{pq|x}` (`x = None` for the empty base), with goods 0-based.
fn delta_expr(p: usize, q: usize, x: Option<usize>) -> Expr {
    let (p, q) = (p.min(q), p.max(q));
    let base = x.map_or(Bundle::EMPTY, Bundle::singleton);
    let form = LinearForm::coord(base.with(p))
        .add(&LinearForm::coord(base.with(q)), 1)
        .add(&LinearForm::coord(base), -1)
        .add(&LinearForm::coord(base.with(p).with(q)), -1);
    let name = match x {
        None => format!("δ{}{}", p + 1, q + 1),
        Some(x) => format!("δ{}{}|{}", p + 1, q + 1, x + 1),
    };
    Expr { name, form }
}

/// `lhs − rhs`, either `= 0` or `≥ 0`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub label: String,
    pub form: LinearForm,
}

fn equal(lhs: &Expr, rhs: &Expr) -> Constraint {
    Constraint {
        label: format!("{} = {}", lhs.name, rhs.name),
        form: lhs.form.clone().add(&rhs.form, -1),
    }
}

fn at_least(lhs: &Expr, rhs: &Expr) -> Constraint {
    Constraint {
        label: format!("{} ≥ {}", lhs.name, rhs.name),
        form: lhs.form.clone().add(&rhs.form, -1),
    }
}

/// Monotonicity and submodularity on four goods, shared by every descriptor.
pub fn shared_inequalities() -> &'static [Constraint] {
    static SHARED: OnceLock<Vec<Constraint>> = OnceLock::new();
    SHARED.get_or_init(|| {
        let mut out = Vec::new();
        for base in (0..COORDS as u32).map(Bundle) {
            for g in base.complement_goods(4) {
                out.push(Constraint {
                    label: format!("v({}) ≥ v({})", base.with(g), base),
                    form: LinearForm::coord(base.with(g)).add(&LinearForm::coord(base), -1),
                });
            }
        }
        for base in (0..COORDS as u32).map(Bundle) {
            let rest: Vec<usize> = base.complement_goods(4).collect();
            for (n, &p) in rest.iter().enumerate() {
                for &q in &rest[n + 1..] {
                    let form = LinearForm::coord(base.with(p))
                        .add(&LinearForm::coord(base.with(q)), 1)
                        .add(&LinearForm::coord(base), -1)
                        .add(&LinearForm::coord(base.with(p).with(q)), -1);
                    out.push(Constraint {
                        label: format!("δ{}{}|{} ≥ 0", p + 1, q + 1, base),
                        form,
                    });
                }
            }
        }
        out
    })
}

// ---------------------------------------------------------------------------
// Four goods: descriptors
// ---------------------------------------------------------------------------

/// Role of a good in a labeling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    I,
    J,
    K,
    L,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::I, Role::J, Role::K, Role::L];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["i", "j", "k", "l"][self.index()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    One,
    Two,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::One => f.write_str("Case 1"),
            Case::Two => f.write_str("Case 2"),
        }
    }
}

/// `Main`, or the subcase in which no row minimum involves `θ_{−x}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subcase {
    Main,
    Exclude(Role),
}

impl Subcase {
    pub const ALL: [Subcase; 5] = [
        Subcase::Main,
        Subcase::Exclude(Role::I),
        Subcase::Exclude(Role::J),
        Subcase::Exclude(Role::K),
        Subcase::Exclude(Role::L),
    ];
}

impl fmt::Display for Subcase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subcase::Main => f.write_str("main"),
            Subcase::Exclude(r) => write!(f, "excl_{r}"),
        }
    }
}

type RolePairs = Vec<(Role, Role)>;

/// Pairs of roles whose `δ` equals `a`, followed by the remaining edges.
fn edge_roles(case: Case) -> (RolePairs, RolePairs) {
    use Role::*;
    match case {
        Case::One => (vec![(I, J), (I, K), (I, L)], vec![(J, K), (J, L), (K, L)]),
        Case::Two => (vec![(I, J), (J, K), (K, L), (I, L)], vec![(I, K), (J, L)]),
    }
}

/// For each row role, the two column roles whose entries are the row
/// minimum. Entry `(x, y)` is `δ_{pq|x} = θ_{−y} − δ_xp − δ_xq`.
fn box_pattern(case: Case, subcase: Subcase) -> [[Role; 2]; 4] {
    use Role::*;
    let main = match case {
        Case::One => [[K, L], [K, L], [I, J], [I, J]],
        Case::Two => [[J, L], [I, K], [J, L], [I, K]],
    };
    let Subcase::Exclude(x) = subcase else {
        return main;
    };
    let mut out = main;
    for (row, boxes) in out.iter_mut().enumerate() {
        if boxes.contains(&x) {
            let rest: Vec<Role> =
                Role::ALL.into_iter().filter(|&r| r.index() != row && r != x).collect();
            *boxes = [rest[0], rest[1]];
        }
    }
    out
}

/// A candidate maximal polyhedron on four goods.
///
/// Membership means: every equality holds, every listed inequality is `≥ 0`,
/// and the shared monotonicity and submodularity constraints hold.
#[derive(Clone, Debug)]
pub struct PolyhedronDescriptor {
    pub case: Case,
    pub subcase: Subcase,
    /// `labeling[role]` is the good (0-based) playing that role.
    pub labeling: [usize; 4],
    pub equalities: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
}

impl PolyhedronDescriptor {
    pub fn new(case: Case, subcase: Subcase, labeling: [usize; 4]) -> Result<Self> {
        let mut sorted = labeling;
        sorted.sort_unstable();
        if sorted != [0, 1, 2, 3] {
            return Err(Error::InvalidArgument(format!("{labeling:?} is not a permutation of 0..4")));
        }
        let good = |r: Role| labeling[r.index()];
        let edge = |(p, q): (Role, Role)| delta_expr(good(p), good(q), None);
        let entry = |x: Role, y: Role| {
            let [p, q]: [usize; 2] = Role::ALL
                .into_iter()
                .filter(|&r| r != x && r != y)
                .map(good)
                .collect::<Vec<_>>()
                .try_into()
                .expect("two roles remain");
            delta_expr(p, q, Some(good(x)))
        };

        let empty = Expr { name: "v(∅)".into(), form: LinearForm::coord(Bundle::EMPTY) };
        let zero = Expr { name: "0".into(), form: LinearForm::zero() };
        let mut equalities = vec![equal(&empty, &zero)];
        let mut inequalities = Vec::new();

        let (a_edges, rest) = edge_roles(case);
        for &e in &a_edges[1..] {
            equalities.push(equal(&edge(a_edges[0]), &edge(e)));
        }
        let a = edge(a_edges[0]);
        match case {
            Case::One => {
                // rest = [jk, jl, kl]: δ_jk = δ_jl = b ≤ c = δ_kl, a ≤ b.
                let (b, b2, c) = (edge(rest[0]), edge(rest[1]), edge(rest[2]));
                equalities.push(equal(&b, &b2));
                inequalities.push(at_least(&b, &a));
                inequalities.push(at_least(&c, &b));
            }
            Case::Two => {
                for &e in &rest {
                    inequalities.push(at_least(&edge(e), &a));
                }
            }
        }

        for (row, boxes) in box_pattern(case, subcase).into_iter().enumerate() {
            let x = Role::ALL[row];
            let open = Role::ALL
                .into_iter()
                .find(|&y| y != x && !boxes.contains(&y))
                .expect("three columns per row");
            let (b0, b1) = (entry(x, boxes[0]), entry(x, boxes[1]));
            equalities.push(equal(&b0, &b1));
            inequalities.push(at_least(&entry(x, open), &b0));
        }
        Ok(PolyhedronDescriptor { case, subcase, labeling, equalities, inequalities })
    }

    /// Rank of the equality system; 6 for every maximal polyhedron.
    pub fn equality_rank(&self) -> usize {
        rank(&self.equality_rows())
    }

    fn equality_rows(&self) -> Vec<Vec<Value>> {
        self.equalities
            .iter()
            .map(|c| c.form.0.iter().map(|&x| Value::int(x)).collect())
            .collect()
    }

    /// True iff `v` satisfies every constraint of the descriptor.
    pub fn contains(&self, v: &Valuation) -> Result<bool> {
        for c in &self.equalities {
            if !c.form.eval(v)?.is_zero() {
                return Ok(false);
            }
        }
        for c in self.inequalities.iter().chain(shared_inequalities()) {
            if c.form.eval(v)?.is_negative() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff `v` satisfies the equalities and every listed inequality
    /// strictly.
    fn strictly_contains(&self, v: &Valuation) -> Result<bool> {
        for c in &self.equalities {
            if !c.form.eval(v)?.is_zero() {
                return Ok(false);
            }
        }
        for c in &self.inequalities {
            if !c.form.eval(v)?.is_positive() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Canonical form of the constraint system: the reduced row echelon form
    /// of the equalities, and the inequalities reduced modulo the equalities,
    /// each scaled to a primitive integer vector.
    fn canonical_key(&self) -> (Vec<Vec<i64>>, BTreeSet<Vec<i64>>) {
        let rref = reduced_echelon(self.equality_rows());
        let inequalities = self
            .inequalities
            .iter()
            .filter_map(|c| {
                let mut row: Vec<Value> = c.form.0.iter().map(|&x| Value::int(x)).collect();
                reduce_by(&mut row, &rref);
                primitive(&row)
            })
            .collect();
        let equalities = rref.iter().filter_map(|r| primitive(&r.1)).collect();
        (equalities, inequalities)
    }

    /// Labeling with goods displayed 1-based.
    fn labeling_string(&self) -> String {
        let goods: Vec<String> = self.labeling.iter().map(|g| (g + 1).to_string()).collect();
        format!("(i,j,k,l)=({})", goods.join(","))
    }

    /// Header line followed by one line per constraint.
    pub fn listing(&self) -> String {
        let mut out = format!("{self}\n");
        for c in &self.equalities {
            out.push_str(&format!("  {}\n", c.label));
        }
        for c in &self.inequalities {
            out.push_str(&format!("  {}\n", c.label));
        }
        out
    }

    /// `count` valuations strictly inside the polyhedron (all listed
    /// inequalities strict), checked to be substitute valuations.
    pub fn sample_interior(&self, count: usize, seed: u64) -> Result<Vec<Valuation>> {
        const MAX_ATTEMPTS: usize = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(Error::NotConstructible(format!("no interior point found for {self}")));
            }
            let v = self.draw(&mut rng)?;
            if self.strictly_contains(&v)? && is_substitute(&v)? {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// A random point on the equality subspace: `δ`'s following the case
    /// pattern, `θ_{−·}` solving the box equalities, and `θ(1234)`, `μ` large
    /// enough for supermodularity and monotonicity.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Valuation> {
        const DEN: i64 = 64;
        let mut r = |lo: i64, hi: i64| Value::new(rng.gen_range(lo * DEN..=hi * DEN), DEN);

        // δ by role pair.
        let mut d = [[Value::ZERO; 4]; 4];
        let a = r(1, 4);
        let (a_edges, rest) = edge_roles(self.case);
        let mut others = Vec::new();
        match self.case {
            Case::One => {
                let b = a.checked_add(r(1, 4))?;
                let c = b.checked_add(r(1, 4))?;
                others.extend([b, b, c]);
            }
            Case::Two => others.extend([a.checked_add(r(1, 4))?, a.checked_add(r(1, 4))?]),
        }
        for (&(p, q), x) in a_edges.iter().map(|e| (e, a)).chain(rest.iter().zip(others)) {
            d[p.index()][q.index()] = x;
            d[q.index()][p.index()] = x;
        }
        let top = max_delta(&d);

        // θ_{−y} by role: each row box equality reads
        // t_{y0} − δ_{x p0} − δ_{x q0} = t_{y1} − δ_{x p1} − δ_{x q1}.
        let row_sum = |x: usize, y: usize| -> Result<Value> {
            let terms = (0..4).filter(|&z| z != x && z != y).map(|z| d[x][z]);
            Ok(Value::sum(terms)?)
        };
        let mut eqs = Vec::new();
        for (x, boxes) in box_pattern(self.case, self.subcase).into_iter().enumerate() {
            let (y0, y1) = (boxes[0].index(), boxes[1].index());
            // t_{y0} − t_{y1} = row_sum(x, y0) − row_sum(x, y1)
            eqs.push((y0, y1, row_sum(x, y0)?.checked_sub(row_sum(x, y1)?)?));
        }
        let base = top.checked_mul(Value::int(4))?;
        let mut t: [Option<Value>; 4] = [None; 4];
        for root in 0..4 {
            if t[root].is_none() {
                t[root] = Some(base.checked_add(r(0, 8))?);
            }
            loop {
                let mut changed = false;
                for &(y0, y1, diff) in &eqs {
                    match (t[y0], t[y1]) {
                        (Some(x), None) => {
                            t[y1] = Some(x.checked_sub(diff)?);
                            changed = true;
                        }
                        (None, Some(y)) => {
                            t[y0] = Some(y.checked_add(diff)?);
                            changed = true;
                        }
                        _ => {}
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        let t: Vec<Value> = t.into_iter().map(|x| x.expect("every role assigned")).collect();
        for &(y0, y1, diff) in &eqs {
            if t[y0].checked_sub(t[y1])? != diff {
                return Err(Error::Inconsistent(format!("box equalities of {self} conflict")));
            }
        }

        // θ(1234) ≥ t_x + t_y − δ_zw for every split {x,y} ∪ {z,w}.
        let mut full = Value::ZERO;
        for x in 0..4 {
            for y in x + 1..4 {
                let [z, w]: [usize; 2] = (0..4)
                    .filter(|&g| g != x && g != y)
                    .collect::<Vec<_>>()
                    .try_into()
                    .expect("two remain");
                full = full.max(t[x].checked_add(t[y])?.checked_sub(d[z][w])?);
            }
        }
        let full = full.checked_add(r(1, 4))?;

        let mut theta = vec![Value::ZERO; COORDS];
        let mut mu = vec![Value::ZERO; 4];
        let good = |role: usize| self.labeling[role];
        for p in 0..4 {
            for q in p + 1..4 {
                theta[Bundle::from_goods([good(p), good(q)]).index()] = d[p][q];
            }
            let missing = Bundle::full(4).without(good(p));
            theta[missing.index()] = t[p];
            mu[good(p)] = full.checked_add(r(1, 4))?;
        }
        theta[Bundle::full(4).index()] = full;
        from_interaction(&InteractionFunction::new(4, theta, mu)?)
    }
}

fn max_delta(d: &[[Value; 4]; 4]) -> Value {
    d.iter().flatten().copied().max().unwrap_or(Value::ZERO)
}

impl fmt::Display for PolyhedronDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.case, self.subcase, self.labeling_string())
    }
}

/// Reduced row echelon form as `(pivot column, row)` pairs, pivots 1.
fn reduced_echelon(mut rows: Vec<Vec<Value>>) -> Vec<(usize, Vec<Value>)> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out: Vec<(usize, Vec<Value>)> = Vec::new();
    for col in 0..cols {
        let Some(pos) = rows.iter().position(|r| !r[col].is_zero()) else {
            continue;
        };
        let mut pivot = rows.swap_remove(pos);
        let scale = pivot[col];
        for x in pivot.iter_mut() {
            *x = x.checked_div(scale).expect("small exact coefficients");
        }
        for r in rows.iter_mut().map(|r| r.as_mut_slice()).chain(out.iter_mut().map(|(_, r)| r.as_mut_slice())) {
            let f = r[col];
            if !f.is_zero() {
                for (x, p) in r.iter_mut().zip(&pivot) {
                    *x = x
                        .checked_sub(f.checked_mul(*p).expect("small exact coefficients"))
                        .expect("small exact coefficients");
                }
            }
        }
        out.push((col, pivot));
    }
    out
}

fn reduce_by(row: &mut [Value], rref: &[(usize, Vec<Value>)]) {
    for (col, pivot) in rref {
        let f = row[*col];
        if !f.is_zero() {
            for (x, p) in row.iter_mut().zip(pivot) {
                *x = x
                    .checked_sub(f.checked_mul(*p).expect("small exact coefficients"))
                    .expect("small exact coefficients");
            }
        }
    }
}

/// Positive multiple with coprime integer entries; `None` for the zero row.
fn primitive(row: &[Value]) -> Option<Vec<i64>> {
    let lcm = row.iter().fold(1i64, |acc, x| acc.lcm(&x.denom()));
    let ints: Vec<i64> = row.iter().map(|x| x.numer() * (lcm / x.denom())).collect();
    let gcd = ints.iter().fold(0i64, |acc, x| acc.gcd(x));
    (gcd != 0).then(|| ints.iter().map(|x| x / gcd).collect())
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for i in 0..4 {
        for j in (0..4).filter(|&j| j != i) {
            for k in (0..4).filter(|&k| k != i && k != j) {
                let l = 6 - i - j - k;
                out.push([i, j, k, l]);
            }
        }
    }
    out
}

/// The distinct maximal polyhedrons on four goods: every labeling and
/// subcase of both cases, deduplicated by canonical constraint systems.
/// Ordered by case, subcase, then labeling.
pub fn census_k4() -> Vec<PolyhedronDescriptor> {
    census_ref().to_vec()
}

fn census_ref() -> &'static [PolyhedronDescriptor] {
    static CENSUS: OnceLock<Vec<PolyhedronDescriptor>> = OnceLock::new();
    CENSUS.get_or_init(|| {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        // Labelings outermost, so each polyhedron keeps the first labeling
        // under which it appears and all subcases of one labeling share it.
        for case in [Case::One, Case::Two] {
            for labeling in permutations4() {
                for subcase in Subcase::ALL {
                    let d = PolyhedronDescriptor::new(case, subcase, labeling)
                        .expect("labeling is a permutation");
                    if seen.insert(d.canonical_key()) {
                        out.push(d);
                    }
                }
            }
        }
        out.sort_by_key(|d| (d.case, d.subcase, d.labeling));
        out
    })
}

/// Every census descriptor containing the substitute valuation `v`.
pub fn classify_k4(v: &Valuation) -> Result<Vec<PolyhedronDescriptor>> {
    require_substitute(v, 4)?;
    let hits = census_ref()
        .par_iter()
        .map(|d| Ok(d.contains(v)?.then(|| d.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.into_iter().flatten().collect())
}

/// Whether a valuation on four goods is an assignment valuation, as far as
/// the maximal-polyhedron picture decides it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// In some Case 1 polyhedron.
    Yes,
    /// Only in Case 2 polyhedrons, with `0 < a < min{b, c}`.
    No,
    /// Only in Case 2 polyhedrons, with `a = 0`: a lower-dimensional face
    /// that the polyhedral criterion does not settle.
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        })
    }
}

pub fn is_assignment_k4(v: &Valuation) -> Result<Verdict> {
    let members = classify_k4(v)?;
    if members.iter().any(|d| d.case == Case::One) {
        return Ok(Verdict::Yes);
    }
    let mut a = None;
    for p in 0..4 {
        for q in p + 1..4 {
            let x = delta(v, p, q, Bundle::EMPTY)?;
            a = Some(a.map_or(x, |m: Value| m.min(x)));
        }
    }
    // Outside Case 1, at most four δ's equal a, so a < min{b, c} already.
    Ok(if a.is_some_and(|a| a.is_positive()) { Verdict::No } else { Verdict::Unknown })
}

/// Affine dimension of `count` interior samples of each descriptor.
pub fn census_dimensions(count: usize, seed: u64) -> Result<Vec<usize>> {
    census_ref()
        .par_iter()
        .enumerate()
        .map(|(n, d)| affine_dimension(&d.sample_interior(count, seed.wrapping_add(n as u64))?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{assignment_valuation, WeightMatrix};
    use crate::checks::check_valuation;

    fn int(x: i64) -> Value {
        Value::int(x)
    }

    #[test]
    fn k3_examples() {
        let p = K3Params { perm: [0, 1, 2], a: int(1), b: int(2), c: int(4), mu: [int(2), int(3), int(3)] };
        let v = k3_valuation(&p).unwrap();
        assert_eq!(v, Valuation::from_ints(3, &[0, 2, 3, 4, 3, 4, 4, 4]).unwrap());
        assert!(check_valuation(&v).unwrap().substitute);
        assert_eq!(classify_k3(&v).unwrap(), vec![K3Polyhedron { pivot: 0 }]);
        assert_eq!(K3Polyhedron { pivot: 0 }.to_string(), "δ12=δ13");
        assert_eq!(K3Polyhedron { pivot: 2 }.to_string(), "δ13=δ23");

        let zero = K3Params { a: int(0), b: int(0), c: int(0), ..p.clone() };
        let lin = k3_valuation(&zero).unwrap();
        assert_eq!(lin, Valuation::linear(&p.mu).unwrap());
        assert_eq!(classify_k3(&lin).unwrap().len(), 3);

        let bad = K3Params { a: int(2), b: int(1), ..p };
        assert!(matches!(k3_valuation(&bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn k3_rejects_non_substitutes() {
        let v = Valuation::from_ints(3, &[0, 1, 1, 3, 1, 2, 2, 3]).unwrap();
        assert!(matches!(classify_k3(&v), Err(Error::NotSubstitute)));
    }

    #[test]
    fn census_counts_and_ranks() {
        let census = census_k4();
        assert_eq!(census.len(), 75);
        assert_eq!(census.iter().filter(|d| d.case == Case::One).count(), 60);
        for sub in Subcase::ALL {
            let n1 = census.iter().filter(|d| d.case == Case::One && d.subcase == sub).count();
            let n2 = census.iter().filter(|d| d.case == Case::Two && d.subcase == sub).count();
            assert_eq!((n1, n2), (12, 3), "{sub}");
        }
        assert!(census.iter().all(|d| d.equality_rank() == 6));
    }

    #[test]
    fn census_interiors_are_ten_dimensional() {
        let dims = census_dimensions(16, 7).unwrap();
        assert!(dims.iter().all(|&d| d == 10), "{dims:?}");
    }

    /// θ_{−i} = 6, θ_{−j} = 5, θ_{−k} = θ_{−l} = 4 with a, b, c = 1, 2, 3.
    fn case1_example() -> Valuation {
        let mut theta = vec![int(0); 16];
        let set = |t: &mut Vec<Value>, goods: &[usize], x: i64| t[Bundle::from_goods(goods.iter().copied()).index()] = int(x);
        for (g, x) in [([0, 1], 1), ([0, 2], 1), ([0, 3], 1), ([1, 2], 2), ([1, 3], 2), ([2, 3], 3)] {
            set(&mut theta, &g, x);
        }
        for (g, x) in [([1, 2, 3], 6), ([0, 2, 3], 5), ([0, 1, 3], 4), ([0, 1, 2], 4)] {
            set(&mut theta, &g, x);
        }
        set(&mut theta, &[0, 1, 2, 3], 8);
        from_interaction(&InteractionFunction::new(4, theta, vec![int(4); 4]).unwrap()).unwrap()
    }

    /// Cycle 1–2–3–4 at a = 1, diagonals 5, θ_{−·} = 6, θ(1234) minimal.
    pub(crate) fn case2_example() -> Valuation {
        let mut theta = vec![int(0); 16];
        for (p, q) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            theta[Bundle::from_goods([p, q]).index()] = int(1);
        }
        for (p, q) in [(0, 2), (1, 3)] {
            theta[Bundle::from_goods([p, q]).index()] = int(5);
        }
        for g in 0..4 {
            theta[Bundle::full(4).without(g).index()] = int(6);
        }
        // θ(1234) ≥ t_x + t_y − δ_zw: 12 − 1 = 11 is the binding split.
        theta[Bundle::full(4).index()] = int(11);
        let mu = vec![int(5); 4];
        from_interaction(&InteractionFunction::new(4, theta, mu).unwrap()).unwrap()
    }

    #[test]
    fn case1_example_is_main_subcase() {
        let v = case1_example();
        assert!(check_valuation(&v).unwrap().substitute);
        let hits = classify_k4(&v).unwrap();
        assert!(hits
            .iter()
            .any(|d| d.case == Case::One && d.subcase == Subcase::Main && d.labeling[..2] == [0, 1]));
        assert_eq!(is_assignment_k4(&v).unwrap(), Verdict::Yes);
    }

    #[test]
    fn case2_example_is_not_assignment() {
        let v = case2_example();
        assert!(check_valuation(&v).unwrap().substitute);
        let hits = classify_k4(&v).unwrap();
        assert!(!hits.is_empty());
        assert!(hits.iter().all(|d| d.case == Case::Two));
        assert_eq!(is_assignment_k4(&v).unwrap(), Verdict::No);
    }

    #[test]
    fn linear_valuations_are_everywhere() {
        let v = Valuation::linear(&[int(1), int(2), int(3), int(4)]).unwrap();
        assert_eq!(classify_k4(&v).unwrap().len(), 75);
        assert_eq!(is_assignment_k4(&v).unwrap(), Verdict::Yes);
    }

    #[test]
    fn case1_weight_matrix_lands_in_main_subcase() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = rng.gen_range(0..4);
            let b = a + rng.gen_range(0..4);
            let c = b + rng.gen_range(0..4);
            let e = c + rng.gen_range(0..4);
            let f = e + rng.gen_range(0..4);
            let d = e - rng.gen_range(0..=c - b);
            let mu = [a + d - b + f - e, d + f - e, f, f].map(|m| m + rng.gen_range(0..3));
            let w = WeightMatrix::from_int_rows(&[
                [mu[0], mu[1], mu[2], mu[3]],
                [mu[0] - a, mu[1] - b, mu[2] - c, 0],
                [0, mu[1] - d, mu[2] - e, 0],
                [0, 0, mu[2] - f, 0],
            ])
            .unwrap();
            let v = assignment_valuation(&w).unwrap();
            let main = PolyhedronDescriptor::new(Case::One, Subcase::Main, [0, 1, 2, 3]).unwrap();
            assert!(main.contains(&v).unwrap(), "a..f = {:?}", (a, b, c, d, e, f));
            let f4 = to_theta(&v);
            let minus = |g: usize| f4.theta(Bundle::full(4).without(g));
            assert_eq!(
                [minus(0), minus(1), minus(2), minus(3)],
                [int(b + e), int(a + e), int(a + d), int(a + d)]
            );
            assert_eq!(f4.theta(Bundle::full(4)), int(a + d + f));
        }
    }

    fn to_theta(v: &Valuation) -> InteractionFunction {
        crate::valuation::to_interaction(v).unwrap()
    }

    #[test]
    fn box_patterns_match_tabulated_subcase() {
        use Role::*;
        assert_eq!(box_pattern(Case::One, Subcase::Exclude(I)), [[K, L], [K, L], [J, L], [J, K]]);
    }

    #[test]
    fn listing_is_readable() {
        let d = PolyhedronDescriptor::new(Case::One, Subcase::Main, [0, 1, 2, 3]).unwrap();
        let text = d.listing();
        assert!(text.starts_with("Case 1 main (i,j,k,l)=(1,2,3,4)\n"));
        assert!(text.contains("  δ12 = δ13\n"));
        assert!(text.contains("  δ24|1 = δ23|1\n"));
    }
}
