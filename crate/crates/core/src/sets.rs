//! Sets and representation functions over `F_q`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{LabError, Result};
use crate::field::{Elem, FieldTower, SubfieldHandle};

/// A subset of `F_q` as a dense bit-vector indexed by element encoding.
#[derive(Clone)]
pub struct FqSet {
    field: Arc<FieldTower>,
    bits: FixedBitSet,
}

impl PartialEq for FqSet {
    fn eq(&self, other: &Self) -> bool {
        self.field.same_field(&other.field) && self.bits == other.bits
    }
}

impl Eq for FqSet {}

impl fmt::Debug for FqSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for FqSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for x in self.iter() {
            seq.serialize_element(&x)?;
        }
        seq.end()
    }
}

impl FqSet {
    pub fn empty(field: &Arc<FieldTower>) -> Self {
        FqSet { field: Arc::clone(field), bits: FixedBitSet::with_capacity(field.q() as usize) }
    }

    pub fn full(field: &Arc<FieldTower>) -> Self {
        let mut s = Self::empty(field);
        s.bits.insert_range(..);
        s
    }

    pub fn from_elems<I: IntoIterator<Item = Elem>>(field: &Arc<FieldTower>, elems: I) -> Result<Self> {
        let mut s = Self::empty(field);
        for x in elems {
            s.try_insert(x)?;
        }
        Ok(s)
    }

    /// Builds a set from JSON-style encodings, rejecting anything outside `[0, q)`.
    pub fn from_encodings(field: &Arc<FieldTower>, encodings: &[u64]) -> Result<Self> {
        let mut s = Self::empty(field);
        for &x in encodings {
            s.bits.insert(field.check(x)? as usize);
        }
        Ok(s)
    }

    pub fn singleton(field: &Arc<FieldTower>, x: Elem) -> Result<Self> {
        Self::from_elems(field, [x])
    }

    pub fn field(&self) -> &Arc<FieldTower> {
        &self.field
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        self.bits.contains(x as usize)
    }

    #[inline]
    pub fn insert(&mut self, x: Elem) {
        self.bits.insert(x as usize);
    }

    pub fn try_insert(&mut self, x: Elem) -> Result<()> {
        self.field.check(x as u64)?;
        self.insert(x);
        Ok(())
    }

    pub fn remove(&mut self, x: Elem) {
        self.bits.set(x as usize, false);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Elements in increasing encoding order.
    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        self.bits.ones().map(|i| i as Elem)
    }

    pub fn to_vec(&self) -> Vec<Elem> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<Elem> {
        self.iter().next()
    }

    pub fn same_field(&self, other: &FqSet) -> Result<()> {
        if self.field.same_field(&other.field) {
            Ok(())
        } else {
            Err(LabError::FieldMismatch)
        }
    }

    pub fn is_subset(&self, other: &FqSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn union(&self, other: &FqSet) -> FqSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        FqSet { field: Arc::clone(&self.field), bits }
    }

    pub fn intersection(&self, other: &FqSet) -> FqSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        FqSet { field: Arc::clone(&self.field), bits }
    }

    pub fn intersection_len(&self, other: &FqSet) -> usize {
        self.bits.intersection_count(&other.bits)
    }

    pub fn difference(&self, other: &FqSet) -> FqSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        FqSet { field: Arc::clone(&self.field), bits }
    }

    pub fn map(&self, f: impl Fn(Elem) -> Elem) -> FqSet {
        let mut out = FqSet::empty(&self.field);
        for x in self.iter() {
            out.insert(f(x));
        }
        out
    }

    /// `A + c`.
    pub fn translate(&self, c: Elem) -> FqSet {
        self.map(|x| self.field.add(x, c))
    }

    /// `lambda * A`.
    pub fn dilate(&self, lambda: Elem) -> FqSet {
        self.map(|x| self.field.mul(x, lambda))
    }

    pub fn without_zero(&self) -> FqSet {
        let mut out = self.clone();
        out.remove(0);
        out
    }
}

/// Binary set operations used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetOp {
    Sum,
    Diff,
    Prod,
    /// `a / b` with `b = 0` pairs dropped.
    Ratio,
}

impl SetOp {
    #[inline]
    pub fn apply(self, field: &FieldTower, a: Elem, b: Elem) -> Option<Elem> {
        match self {
            SetOp::Sum => Some(field.add(a, b)),
            SetOp::Diff => Some(field.sub(a, b)),
            SetOp::Prod => Some(field.mul(a, b)),
            SetOp::Ratio => field.div(a, b),
        }
    }
}

/// The exact image `{a op b}`.
pub fn combine(a: &FqSet, b: &FqSet, op: SetOp) -> Result<FqSet> {
    a.same_field(b)?;
    let field = a.field();
    let mut out = FqSet::empty(field);
    let bs = b.to_vec();
    for x in a.iter() {
        for &y in &bs {
            if let Some(z) = op.apply(field, x, y) {
                out.insert(z);
            }
        }
    }
    Ok(out)
}

/// `A + B`.
pub fn sumset(a: &FqSet, b: &FqSet) -> Result<FqSet> {
    combine(a, b, SetOp::Sum)
}

/// `A - B`.
pub fn diffset(a: &FqSet, b: &FqSet) -> Result<FqSet> {
    combine(a, b, SetOp::Diff)
}

/// `AB`.
pub fn productset(a: &FqSet, b: &FqSet) -> Result<FqSet> {
    combine(a, b, SetOp::Prod)
}

/// An integer-valued function on `F_q`.
#[derive(Clone)]
pub struct RepFn {
    field: Arc<FieldTower>,
    counts: Vec<u64>,
}

impl PartialEq for RepFn {
    fn eq(&self, other: &Self) -> bool {
        self.field.same_field(&other.field) && self.counts == other.counts
    }
}

impl Eq for RepFn {}

impl fmt::Debug for RepFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.sparse()).finish()
    }
}

impl Serialize for RepFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.sparse().serialize(serializer)
    }
}

impl RepFn {
    pub fn zero(field: &Arc<FieldTower>) -> Self {
        RepFn { field: Arc::clone(field), counts: vec![0; field.q() as usize] }
    }

    pub fn from_counts(field: &Arc<FieldTower>, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != field.q() as usize {
            return Err(LabError::InvalidArgument(format!(
                "expected {} counts, got {}",
                field.q(),
                counts.len()
            )));
        }
        Ok(RepFn { field: Arc::clone(field), counts })
    }

    /// Indicator function of a set.
    pub fn indicator(set: &FqSet) -> Self {
        let mut f = Self::zero(set.field());
        for x in set.iter() {
            f.counts[x as usize] = 1;
        }
        f
    }

    pub fn field(&self) -> &Arc<FieldTower> {
        &self.field
    }

    #[inline]
    pub fn get(&self, x: Elem) -> u64 {
        self.counts[x as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [u64] {
        &mut self.counts
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    /// `sum_x f(x)^2`.
    pub fn second_moment(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128 * c as u128).sum()
    }

    pub fn support(&self) -> FqSet {
        let mut s = FqSet::empty(&self.field);
        for (x, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                s.insert(x as Elem);
            }
        }
        s
    }

    /// Nonzero entries as `(encoding, count)` pairs in encoding order.
    pub fn nonzero(&self) -> impl Iterator<Item = (Elem, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(x, &c)| (x as Elem, c))
    }

    pub fn sparse(&self) -> BTreeMap<Elem, u64> {
        self.nonzero().collect()
    }
}

/// `r_{A op B}(x) = #{(a, b) : a op b = x}` for `op` in sum, diff, prod.
pub fn rep_function(a: &FqSet, b: &FqSet, op: SetOp) -> Result<RepFn> {
    a.same_field(b)?;
    if op == SetOp::Ratio {
        return Err(LabError::InvalidArgument(
            "representation functions are defined for sum, diff and prod".into(),
        ));
    }
    let field = a.field();
    let mut out = RepFn::zero(field);
    let bs = b.to_vec();
    for x in a.iter() {
        for &y in &bs {
            let z = op.apply(field, x, y).expect("total operation");
            out.counts[z as usize] += 1;
        }
    }
    Ok(out)
}

/// Smallest `F`-linear subspace of `F_q` containing `W`.
///
/// Each round adjoins the least element of `W` outside the current span, so the
/// loop runs at most `dim` times.
pub fn span_over_subfield(w: &FqSet, sub: &SubfieldHandle) -> Result<FqSet> {
    let field = w.field();
    if !field.same_field(sub.field()) {
        return Err(LabError::FieldMismatch);
    }
    let scalars = sub.elements().to_vec();
    let mut span = FqSet::singleton(field, 0)?;
    let mut members = vec![0 as Elem];
    for v in w.iter() {
        if span.contains(v) {
            continue;
        }
        let line: Vec<Elem> = scalars.iter().map(|&c| field.mul(c, v)).collect();
        let mut next = Vec::with_capacity(members.len() * line.len());
        for &s in &members {
            for &l in &line {
                let z = field.add(s, l);
                if !span.contains(z) {
                    span.insert(z);
                    next.push(z);
                }
            }
        }
        members.extend(next);
    }
    Ok(span)
}

/// `log_{|F|} |S|` when `S` is an `F`-space.
pub fn dimension_over(span: &FqSet, sub: &SubfieldHandle) -> Option<u32> {
    let size = sub.size() as u64;
    let mut n = span.len() as u64;
    let mut d = 0;
    while n > 1 {
        if !n.is_multiple_of(size) {
            return None;
        }
        n /= size;
        d += 1;
    }
    Some(d)
}

/// The least subfield containing `X`. `X ⊆ {0}` yields the prime subfield.
pub fn generated_subfield(x: &FqSet) -> Result<SubfieldHandle> {
    let field = x.field();
    let k = field
        .subfield_degrees()
        .iter()
        .copied()
        .find(|&k| x.iter().all(|e| field.in_subfield(e, k)))
        .expect("r itself always qualifies");
    field.subfield(k)
}
