//! Finite abelian groups, their characters and subgroups.
//!
//! Groups are products of cyclic factors `Z_{d_1} x ... x Z_{d_k}` paired with
//! their duals either by the dot pairing `chi_y(x) = prod exp(2 pi i y_i x_i / d_i)`
//! or, on `Z_d^{2n}`, by the symplectic pairing `chi_y(x) = omega^{[x, y]}`.
//! Subgroups of elementary abelian groups are kept as RREF bases over F_d and
//! subgroups of cyclic groups as a single divisor generator, so two equal
//! subgroups always compare equal field by field. Other products fall back to
//! explicit element lists.

use std::collections::{HashSet, VecDeque};
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modlinalg::{self, FpMatrix};

/// Default cap on `|G|` for anything that enumerates group elements.
pub const DEFAULT_ENUMERATION_BOUND: u64 = 1 << 12;

/// Tolerance used when a character value is compared against 1.
pub const CHAR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    Dot,
    Symplectic,
}

/// Structural class of a group, decides how subgroups are canonicalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// `Z_d^k` with `d` prime.
    Elementary {
        d: u64,
        k: usize,
    },
    /// `Z_n` with `n` composite.
    Cyclic {
        n: u64,
    },
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GroupSpec {
    factors: Vec<u64>,
    pairing: Pairing,
}

#[derive(Deserialize)]
struct RawSpec {
    factors: Vec<u64>,
    pairing: Pairing,
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpec::deserialize(de)?;
        GroupSpec::new(raw.factors, raw.pairing).map_err(serde::de::Error::custom)
    }
}

impl GroupSpec {
    pub fn new(factors: Vec<u64>, pairing: Pairing) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter(
                "group needs at least one factor".into(),
            ));
        }
        if let Some(bad) = factors.iter().find(|&&f| f < 2) {
            return Err(Error::InvalidParameter(format!(
                "cyclic factor order {bad} < 2"
            )));
        }
        if pairing == Pairing::Symplectic {
            let d = factors[0];
            if !modlinalg::is_prime(d)
                || factors.iter().any(|&f| f != d)
                || !factors.len().is_multiple_of(2)
            {
                return Err(Error::InvalidParameter(
                    "symplectic pairing needs Z_d^{2n} with d prime".into(),
                ));
            }
        }
        let mut order: u64 = 1;
        for &f in &factors {
            order = order
                .checked_mul(f)
                .ok_or_else(|| Error::InvalidParameter("group order overflows u64".into()))?;
        }
        Ok(Self { factors, pairing })
    }

    /// `Z_d^k` with the dot pairing.
    pub fn elementary(d: u64, k: usize) -> Result<Self> {
        Self::new(vec![d; k], Pairing::Dot)
    }

    /// `Z_d^{2n}` with the symplectic pairing.
    pub fn symplectic(d: u64, n: usize) -> Result<Self> {
        Self::new(vec![d; 2 * n], Pairing::Symplectic)
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(vec![n], Pairing::Dot)
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn pairing(&self) -> Pairing {
        self.pairing
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn shape(&self) -> Shape {
        let d = self.factors[0];
        if self.factors.iter().all(|&f| f == d) && modlinalg::is_prime(d) {
            Shape::Elementary {
                d,
                k: self.factors.len(),
            }
        } else if self.factors.len() == 1 {
            Shape::Cyclic { n: d }
        } else {
            Shape::Mixed
        }
    }

    /// Number of qudit pairs `n` of a symplectic spec `Z_d^{2n}`.
    pub fn symplectic_half(&self) -> Option<(u64, usize)> {
        (self.pairing == Pairing::Symplectic).then(|| (self.factors[0], self.factors.len() / 2))
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.factors.len()])
    }

    /// Element with coordinates reduced into range.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.factors.len() {
            return Err(Error::SpecMismatch(format!(
                "element has {} coordinates, group has {} factors",
                coords.len(),
                self.factors.len()
            )));
        }
        Ok(GroupElement(
            coords
                .iter()
                .zip(&self.factors)
                .map(|(&c, &f)| c.rem_euclid(f as i64) as u64)
                .collect(),
        ))
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        if g.0.len() != self.factors.len() || g.0.iter().zip(&self.factors).any(|(&c, &f)| c >= f) {
            return Err(Error::SpecMismatch(format!("element {g} is not in {self}")));
        }
        Ok(())
    }

    pub fn add(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        GroupElement(
            g.0.iter()
                .zip(&h.0)
                .zip(&self.factors)
                .map(|((&a, &b), &f)| (a + b) % f)
                .collect(),
        )
    }

    pub fn neg(&self, g: &GroupElement) -> GroupElement {
        GroupElement(
            g.0.iter()
                .zip(&self.factors)
                .map(|(&a, &f)| (f - a) % f)
                .collect(),
        )
    }

    pub fn scale(&self, g: &GroupElement, k: u64) -> GroupElement {
        GroupElement(
            g.0.iter()
                .zip(&self.factors)
                .map(|(&a, &f)| a * (k % f) % f)
                .collect(),
        )
    }

    /// Mixed-radix index with the first coordinate most significant, so index
    /// order is lexicographic order of coordinates.
    pub fn index_of(&self, g: &GroupElement) -> usize {
        g.0.iter()
            .zip(&self.factors)
            .fold(0usize, |acc, (&c, &f)| acc * f as usize + c as usize)
    }

    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        let mut coords = vec![0; self.factors.len()];
        for (c, &f) in coords.iter_mut().zip(&self.factors).rev() {
            *c = (idx % f as usize) as u64;
            idx /= f as usize;
        }
        GroupElement(coords)
    }

    pub fn ensure_enumerable(&self, bound: u64) -> Result<()> {
        let order = self.order();
        if order > bound {
            return Err(Error::Capacity {
                needed: order,
                limit: bound,
            });
        }
        Ok(())
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order() as usize).map(move |i| self.element_at(i))
    }

    /// Denominator `L` such that every character value is `exp(2 pi i t / L)`.
    pub fn phase_denominator(&self) -> u64 {
        match self.pairing {
            Pairing::Symplectic => self.factors[0],
            Pairing::Dot => self.factors.iter().fold(1, |acc, &f| lcm(acc, f)),
        }
    }

    /// Integer exponent `t in [0, L)` with `chi_label(g) = exp(2 pi i t / L)`.
    pub fn pairing_exponent(&self, label: &GroupElement, g: &GroupElement) -> u64 {
        match self.pairing {
            Pairing::Symplectic => {
                modlinalg::symplectic_form(&g.0, &label.0, self.factors[0]).expect("even rank")
            }
            Pairing::Dot => {
                let l = self.phase_denominator();
                label
                    .0
                    .iter()
                    .zip(&g.0)
                    .zip(&self.factors)
                    .fold(0, |acc, ((&y, &x), &f)| (acc + (y * x % f) * (l / f)) % l)
            }
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z{d}")).collect();
        write!(f, "{} ({:?})", parts.join("x"), self.pairing)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Unit root `exp(2 pi i t / l)` from an exact integer exponent.
pub fn root_of_unity(t: u64, l: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (t % l) as f64 / l as f64)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<u64>);

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Character `chi_label` of a group, using the pairing fixed by its spec.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    pub spec: GroupSpec,
    pub label: GroupElement,
}

impl Character {
    pub fn new(spec: GroupSpec, label: GroupElement) -> Result<Self> {
        spec.check(&label)?;
        Ok(Self { spec, label })
    }

    pub fn trivial(spec: GroupSpec) -> Self {
        let label = spec.zero();
        Self { spec, label }
    }
}

pub fn char_eval(chi: &Character, g: &GroupElement) -> Result<Complex64> {
    chi.spec.check(g)?;
    let t = chi.spec.pairing_exponent(&chi.label, g);
    Ok(root_of_unity(t, chi.spec.phase_denominator()))
}

/// True when `chi(g) = 1`, decided on the exact integer exponent.
pub fn char_is_one(chi: &Character, g: &GroupElement) -> Result<bool> {
    chi.spec.check(g)?;
    Ok(chi.spec.pairing_exponent(&chi.label, g) == 0)
}

/// Subgroup in canonical form.
///
/// Equality compares the spec and the canonical form only; the generators a
/// subgroup was built from are kept for reference.
#[derive(Clone, Debug)]
pub struct Subgroup {
    spec: GroupSpec,
    generators: Vec<GroupElement>,
    canonical: Vec<Vec<u64>>,
    order: u64,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.canonical == other.canonical
    }
}

impl Eq for Subgroup {}

impl std::hash::Hash for Subgroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.spec.hash(state);
        self.canonical.hash(state);
    }
}

impl Subgroup {
    pub fn trivial(spec: &GroupSpec) -> Self {
        generated_subgroup(spec, &[]).expect("empty generator list")
    }

    pub fn full(spec: &GroupSpec) -> Self {
        let gens: Vec<GroupElement> = (0..spec.rank())
            .map(|i| {
                let mut c = vec![0; spec.rank()];
                c[i] = 1;
                GroupElement(c)
            })
            .collect();
        generated_subgroup(spec, &gens).expect("unit vectors belong to the group")
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Canonical basis: RREF rows (elementary), `[r]` with `r | n` (cyclic,
    /// empty for the trivial group), or the sorted element list (mixed).
    pub fn canonical_basis(&self) -> Vec<GroupElement> {
        self.canonical.iter().cloned().map(GroupElement).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        if self.spec.check(g).is_err() {
            return false;
        }
        match self.spec.shape() {
            Shape::Elementary { d, .. } => reduce_against(&self.canonical, &g.0, d)
                .iter()
                .all(|&c| c == 0),
            Shape::Cyclic { n } => match self.canonical.first() {
                Some(r) => g.0[0].is_multiple_of(r[0]),
                None => g.0[0].is_multiple_of(n),
            },
            Shape::Mixed => self.canonical.binary_search(&g.0).is_ok(),
        }
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.spec == other.spec && self.canonical_basis().iter().all(|g| other.contains(g))
    }

    /// Smallest subgroup containing this one and `g`.
    pub fn extend(&self, g: &GroupElement) -> Result<Subgroup> {
        if self.contains(g) {
            return Ok(self.clone());
        }
        let mut gens = self.generators.clone();
        gens.push(g.clone());
        generated_subgroup(&self.spec, &gens)
    }

    /// Every element of the subgroup, in index order.
    pub fn elements(&self) -> Vec<GroupElement> {
        match self.spec.shape() {
            Shape::Mixed => self.canonical.iter().cloned().map(GroupElement).collect(),
            _ => {
                let mut out: Vec<GroupElement> = span_elements(&self.spec, &self.canonical_basis());
                out.sort_by_key(|g| self.spec.index_of(g));
                out
            }
        }
    }

    pub fn annihilator(&self) -> Subgroup {
        annihilator(self)
    }
}

fn reduce_against(basis: &[Vec<u64>], v: &[u64], d: u64) -> Vec<u64> {
    let mut v: Vec<u64> = v.iter().map(|&c| c % d).collect();
    for row in basis {
        let p = row
            .iter()
            .position(|&c| c != 0)
            .expect("rref rows are nonzero");
        let f = v[p];
        if f != 0 {
            for (x, &r) in v.iter_mut().zip(row) {
                *x = (*x + d - f * r % d) % d;
            }
        }
    }
    v
}

/// All combinations of the given elements (closure under addition).
fn span_elements(spec: &GroupSpec, gens: &[GroupElement]) -> Vec<GroupElement> {
    let mut seen: HashSet<GroupElement> = HashSet::new();
    let zero = spec.zero();
    seen.insert(zero.clone());
    let mut queue = VecDeque::from([zero]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = spec.add(&x, g);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().collect()
}

fn build(spec: &GroupSpec, generators: Vec<GroupElement>, canonical: Vec<Vec<u64>>) -> Subgroup {
    let order = match spec.shape() {
        Shape::Elementary { d, .. } => d.pow(canonical.len() as u32),
        Shape::Cyclic { n } => canonical.first().map_or(1, |r| n / r[0]),
        Shape::Mixed => canonical.len() as u64,
    };
    Subgroup {
        spec: spec.clone(),
        generators,
        canonical,
        order,
    }
}

/// Smallest subgroup containing every element of `elems`.
pub fn generated_subgroup(spec: &GroupSpec, elems: &[GroupElement]) -> Result<Subgroup> {
    for g in elems {
        spec.check(g)?;
    }
    let canonical = match spec.shape() {
        Shape::Elementary { d, k } => {
            let mut basis: Vec<Vec<u64>> = Vec::new();
            for g in elems {
                if reduce_against(&basis, &g.0, d).iter().any(|&c| c != 0) {
                    basis.push(g.0.clone());
                    basis = FpMatrix::from_rows(&basis, k, d)?.row_space_basis();
                }
            }
            basis
        }
        Shape::Cyclic { n } => {
            let r = elems.iter().fold(n, |acc, g| gcd(acc, g.0[0]));
            if r == n {
                vec![]
            } else {
                vec![vec![r]]
            }
        }
        Shape::Mixed => {
            let mut all: Vec<Vec<u64>> = span_elements(spec, elems)
                .into_iter()
                .map(|g| g.0)
                .collect();
            all.sort();
            all
        }
    };
    Ok(build(spec, elems.to_vec(), canonical))
}

/// `H^perp = {lambda : chi_lambda(h) = 1 for all h in H}`, as a subgroup of the
/// same spec through the identification of `G` with its dual.
pub fn annihilator(h: &Subgroup) -> Subgroup {
    let spec = &h.spec;
    match spec.shape() {
        Shape::Elementary { d, k } => {
            let rows: Vec<Vec<u64>> = match spec.pairing {
                Pairing::Dot => h.canonical.clone(),
                Pairing::Symplectic => h
                    .canonical
                    .iter()
                    .map(|r| modlinalg::symplectic_dual(r, d))
                    .collect(),
            };
            let m = FpMatrix::from_rows(&rows, k, d).expect("prime modulus");
            let kernel = m.kernel_basis().to_rows();
            let gens: Vec<GroupElement> = kernel.iter().cloned().map(GroupElement).collect();
            build(spec, gens, kernel)
        }
        Shape::Cyclic { n } => {
            let r = h.canonical.first().map_or(n, |r| r[0]);
            generated_subgroup(spec, &[GroupElement(vec![(n / r) % n])]).expect("in range")
        }
        Shape::Mixed => {
            let basis = h.canonical_basis();
            let members: Vec<GroupElement> = spec
                .elements()
                .filter(|lam| basis.iter().all(|g| spec.pairing_exponent(lam, g) == 0))
                .collect();
            generated_subgroup(spec, &members).expect("members of spec")
        }
    }
}

/// `{g : chi(g) = 1 for every sampled chi}`, computed directly as a joint
/// kernel rather than through the annihilator.
pub fn joint_kernel(spec: &GroupSpec, samples: &[Character]) -> Result<Subgroup> {
    for s in samples {
        if &s.spec != spec {
            return Err(Error::SpecMismatch(format!(
                "character over {} used with {spec}",
                s.spec
            )));
        }
    }
    match spec.shape() {
        Shape::Elementary { d, k } => {
            let rows: Vec<Vec<u64>> = samples
                .iter()
                .map(|s| match spec.pairing {
                    Pairing::Dot => s.label.0.clone(),
                    // [g, y] = -(J y) . g, same kernel as (J y) . g
                    Pairing::Symplectic => modlinalg::symplectic_dual(&s.label.0, d),
                })
                .collect();
            let kernel = FpMatrix::from_rows(&rows, k, d)?.kernel_basis().to_rows();
            let gens: Vec<GroupElement> = kernel.iter().cloned().map(GroupElement).collect();
            Ok(build(spec, gens, kernel))
        }
        Shape::Cyclic { n } => {
            let g = samples.iter().fold(n, |acc, s| gcd(acc, s.label.0[0]));
            generated_subgroup(spec, &[GroupElement(vec![(n / g) % n])])
        }
        Shape::Mixed => {
            let members: Vec<GroupElement> = spec
                .elements()
                .filter(|g| {
                    samples
                        .iter()
                        .all(|s| spec.pairing_exponent(&s.label, g) == 0)
                })
                .collect();
            generated_subgroup(spec, &members)
        }
    }
}

/// Every subgroup of `spec`, each exactly once, ordered by (order, canonical form).
pub fn enumerate_subgroups(spec: &GroupSpec, bound: u64) -> Result<Vec<Subgroup>> {
    spec.ensure_enumerable(bound)?;
    if let Shape::Cyclic { n } = spec.shape() {
        let mut out: Vec<Subgroup> = (1..=n)
            .filter(|r| n % r == 0)
            .map(|r| generated_subgroup(spec, &[GroupElement(vec![r % n])]).expect("in range"))
            .collect();
        out.sort_by(|a, b| (a.order, &a.canonical).cmp(&(b.order, &b.canonical)));
        return Ok(out);
    }
    enumerate_supergroups(&Subgroup::trivial(spec), bound)
}

/// Every subgroup `K` with `H <= K <= G`, including `H` itself.
pub fn enumerate_supergroups(h: &Subgroup, bound: u64) -> Result<Vec<Subgroup>> {
    let spec = &h.spec;
    spec.ensure_enumerable(bound)?;
    let elements: Vec<GroupElement> = spec.elements().collect();
    let mut seen: HashSet<Vec<Vec<u64>>> = HashSet::new();
    seen.insert(h.canonical.clone());
    let mut out = vec![h.clone()];
    let mut queue = VecDeque::from([h.clone()]);
    while let Some(s) = queue.pop_front() {
        for g in &elements {
            if s.contains(g) {
                continue;
            }
            let t = s.extend(g)?;
            if seen.insert(t.canonical.clone()) {
                out.push(t.clone());
                queue.push_back(t);
            }
        }
    }
    out.sort_by(|a, b| (a.order, &a.canonical).cmp(&(b.order, &b.canonical)));
    Ok(out)
}

/// Wire form of a subgroup.
#[derive(Serialize, Deserialize)]
struct SubgroupJson {
    factors: Vec<u64>,
    pairing: Pairing,
    generators: Vec<Vec<u64>>,
}

impl Serialize for Subgroup {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        SubgroupJson {
            factors: self.spec.factors.clone(),
            pairing: self.spec.pairing,
            generators: self.canonical_basis().into_iter().map(|g| g.0).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Subgroup {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SubgroupJson::deserialize(de)?;
        let spec = GroupSpec::new(raw.factors, raw.pairing).map_err(D::Error::custom)?;
        let gens: Vec<GroupElement> = raw.generators.into_iter().map(GroupElement).collect();
        generated_subgroup(&spec, &gens).map_err(D::Error::custom)
    }
}
