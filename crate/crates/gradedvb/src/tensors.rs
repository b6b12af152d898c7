//! Dense exact-rational multilinear maps and the graded product.
//!
//! A [`MultiTensor`] with slots of dimensions `d_1,…,d_s` and output dimension
//! `o` stores `o·Πd_j` coefficients. The input index is row-major over the
//! slots and the output index runs fastest.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::partitions::{enumerate_splits, IntPartition, Permutation};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse { line: 0, msg: format!("bad rational {s:?}") };
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    let num: BigInt = num.trim().parse().map_err(|_| bad())?;
    let den: BigInt = den.trim().parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Slot degrees (nondecreasing) and the fiber dimension of each slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedShape {
    pub degrees: Vec<usize>,
    pub dims: Vec<usize>,
}

impl GradedShape {
    pub fn new(degrees: Vec<usize>, dims: Vec<usize>) -> Result<Self> {
        if degrees.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} degrees but {} dims",
                degrees.len(),
                dims.len()
            )));
        }
        if degrees.windows(2).any(|w| w[0] > w[1]) || degrees.contains(&0) {
            return Err(Error::ShapeMismatch(format!("degrees {degrees:?} not a natural order")));
        }
        Ok(GradedShape { degrees, dims })
    }

    /// Slots of degrees `p` with dims taken from `ranks[degree-1]`.
    pub fn from_ranks(p: &[usize], ranks: &[usize]) -> Self {
        GradedShape { degrees: p.to_vec(), dims: p.iter().map(|&d| ranks[d - 1]).collect() }
    }

    pub fn scalar() -> Self {
        GradedShape { degrees: Vec::new(), dims: Vec::new() }
    }

    pub fn slots(&self) -> usize {
        self.degrees.len()
    }

    pub fn input_size(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn total_degree(&self) -> usize {
        self.degrees.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiTensor {
    shape: GradedShape,
    out: usize,
    coeffs: Vec<Rational>,
}

impl MultiTensor {
    pub fn zeros(shape: GradedShape, out: usize) -> Self {
        let len = shape.input_size() * out;
        MultiTensor { shape, out, coeffs: vec![Rational::zero(); len] }
    }

    pub fn from_coeffs(shape: GradedShape, out: usize, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() != shape.input_size() * out {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                shape.input_size() * out,
                coeffs.len()
            )));
        }
        Ok(MultiTensor { shape, out, coeffs })
    }

    /// The identity map on a `dim`-dimensional fiber of the given degree.
    pub fn identity(degree: usize, dim: usize) -> Self {
        let mut t = MultiTensor::zeros(GradedShape { degrees: vec![degree], dims: vec![dim] }, dim);
        for i in 0..dim {
            t.coeffs[i * dim + i] = Rational::one();
        }
        t
    }

    /// A degree-0 scalar section.
    pub fn scalar(value: Rational) -> Self {
        MultiTensor { shape: GradedShape::scalar(), out: 1, coeffs: vec![value] }
    }

    pub fn shape(&self) -> &GradedShape {
        &self.shape
    }

    pub fn degrees(&self) -> &[usize] {
        &self.shape.degrees
    }

    pub fn dims(&self) -> &[usize] {
        &self.shape.dims
    }

    pub fn out_dim(&self) -> usize {
        self.out
    }

    pub fn slots(&self) -> usize {
        self.shape.slots()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Rational] {
        &mut self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Flat position of (input multi-index, output index).
    pub fn position(&self, index: &[usize], o: usize) -> usize {
        let mut flat = 0;
        for (i, &d) in index.iter().zip(&self.shape.dims) {
            flat = flat * d + i;
        }
        flat * self.out + o
    }

    pub fn get(&self, index: &[usize], o: usize) -> &Rational {
        &self.coeffs[self.position(index, o)]
    }

    pub fn set(&mut self, index: &[usize], o: usize, value: Rational) {
        let p = self.position(index, o);
        self.coeffs[p] = value;
    }

    /// The output column for a tuple of basis vectors.
    pub fn column(&self, index: &[usize]) -> &[Rational] {
        let start = self.position(index, 0);
        &self.coeffs[start..start + self.out]
    }

    fn same_layout(&self, other: &MultiTensor) -> Result<()> {
        if self.shape != other.shape || self.out != other.out {
            return Err(Error::ShapeMismatch(format!(
                "{:?}->{} vs {:?}->{}",
                self.shape, self.out, other.shape, other.out
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiTensor) -> Result<MultiTensor> {
        self.same_layout(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(MultiTensor { shape: self.shape.clone(), out: self.out, coeffs })
    }

    pub fn add_assign(&mut self, other: &MultiTensor) -> Result<()> {
        self.same_layout(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&self, c: &Rational) -> MultiTensor {
        MultiTensor {
            shape: self.shape.clone(),
            out: self.out,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn neg(&self) -> MultiTensor {
        self.scale(&-Rational::one())
    }

    /// Multilinear contraction with one vector per slot.
    pub fn evaluate(&self, vectors: &[&[Rational]]) -> Result<Vec<Rational>> {
        if vectors.len() != self.slots() {
            return Err(Error::ShapeMismatch(format!(
                "{} vectors for {} slots",
                vectors.len(),
                self.slots()
            )));
        }
        for (v, &d) in vectors.iter().zip(&self.shape.dims) {
            if v.len() != d {
                return Err(Error::ShapeMismatch(format!("vector of length {} for slot of dim {d}", v.len())));
            }
        }
        let mut out = vec![Rational::zero(); self.out];
        self.accumulate(vectors, &Rational::one(), &mut out);
        Ok(out)
    }

    /// `out += scale · self(vectors)`, skipping zero entries. Shapes are trusted.
    pub fn accumulate(&self, vectors: &[&[Rational]], scale: &Rational, out: &mut [Rational]) {
        if scale.is_zero() {
            return;
        }
        let nz: Vec<Vec<(usize, &Rational)>> = vectors
            .iter()
            .map(|v| v.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect())
            .collect();
        if nz.iter().any(|v| v.is_empty()) {
            return;
        }
        let mut idx = vec![0usize; nz.len()];
        loop {
            let mut flat = 0;
            let mut w = scale.clone();
            for (k, &i) in idx.iter().enumerate() {
                let (pos, c) = nz[k][i];
                flat = flat * self.shape.dims[k] + pos;
                w *= c;
            }
            let base = flat * self.out;
            for o in 0..self.out {
                let c = &self.coeffs[base + o];
                if !c.is_zero() {
                    out[o] += &w * c;
                }
            }
            if !advance(&mut idx, |k| nz[k].len()) {
                break;
            }
        }
    }

    /// The tensor with its slots reordered: slot `k` of the result is slot
    /// `order[k]` of `self`.
    pub fn permute_slots(&self, order: &[usize]) -> MultiTensor {
        let s = self.slots();
        assert_eq!(order.len(), s);
        let shape = GradedShape {
            degrees: order.iter().map(|&k| self.shape.degrees[k]).collect(),
            dims: order.iter().map(|&k| self.shape.dims[k]).collect(),
        };
        let mut result = MultiTensor { shape, out: self.out, coeffs: Vec::new() };
        result.coeffs = vec![Rational::zero(); self.coeffs.len()];
        let mut src = vec![0usize; s];
        for_each_index(&result.shape.dims.clone(), |index| {
            for (k, &i) in index.iter().enumerate() {
                src[order[k]] = i;
            }
            let from = self.position(&src, 0);
            let to = result.position(index, 0);
            for o in 0..self.out {
                result.coeffs[to + o] = self.coeffs[from + o].clone();
            }
        });
        result
    }

    /// Precompose slot `k` with the linear map `maps[k]`.
    pub fn precompose_linear(&self, maps: &[&MultiTensor]) -> Result<MultiTensor> {
        if maps.len() != self.slots() {
            return Err(Error::ShapeMismatch("one linear map per slot required".into()));
        }
        for (k, m) in maps.iter().enumerate() {
            if m.slots() != 1 || m.out_dim() != self.shape.dims[k] {
                return Err(Error::ShapeMismatch(format!("linear map for slot {k} has the wrong shape")));
            }
        }
        let shape = GradedShape {
            degrees: self.shape.degrees.clone(),
            dims: maps.iter().map(|m| m.dims()[0]).collect(),
        };
        let mut result = MultiTensor::zeros(shape, self.out);
        let one = Rational::one();
        for_each_index(&result.shape.dims.clone(), |index| {
            let cols: Vec<&[Rational]> = maps.iter().zip(index).map(|(m, &i)| m.column(&[i])).collect();
            let at = result.position(index, 0);
            let (_, tail) = result.coeffs.split_at_mut(at);
            self.accumulate(&cols, &one, &mut tail[..self.out]);
        });
        Ok(result)
    }

    /// Postcompose with a linear map on the output.
    pub fn postcompose_linear(&self, map: &MultiTensor) -> Result<MultiTensor> {
        if map.slots() != 1 || map.dims()[0] != self.out {
            return Err(Error::ShapeMismatch("linear map does not match the output".into()));
        }
        let mut result = MultiTensor::zeros(self.shape.clone(), map.out_dim());
        let one = Rational::one();
        let n_in = self.shape.input_size();
        for flat in 0..n_in {
            let col = &self.coeffs[flat * self.out..(flat + 1) * self.out];
            let (_, tail) = result.coeffs.split_at_mut(flat * map.out_dim());
            map.accumulate(&[col], &one, &mut tail[..map.out_dim()]);
        }
        Ok(result)
    }

    /// Slot groups of equal degree, as index ranges.
    fn degree_blocks(&self) -> Vec<(usize, std::ops::Range<usize>)> {
        let mut blocks = Vec::new();
        let d = &self.shape.degrees;
        let mut start = 0;
        while start < d.len() {
            let mut end = start + 1;
            while end < d.len() && d[end] == d[start] {
                end += 1;
            }
            blocks.push((d[start], start..end));
            start = end;
        }
        blocks
    }

    /// True iff swapping two equal-degree-d slots multiplies by (−1)^d.
    pub fn is_graded_symmetric(&self) -> bool {
        for (deg, range) in self.degree_blocks() {
            for k in range.start..range.end.saturating_sub(1) {
                let mut order: Vec<usize> = (0..self.slots()).collect();
                order.swap(k, k + 1);
                let swapped = self.permute_slots(&order);
                let ok = if deg % 2 == 0 { swapped == *self } else { swapped == self.neg() };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// The projection onto graded-symmetric tensors.
    pub fn graded_symmetrize(&self) -> MultiTensor {
        let blocks = self.degree_blocks();
        let perms_per_block: Vec<Vec<Permutation>> =
            blocks.iter().map(|(_, r)| Permutation::all(r.len())).collect();
        let mut acc = MultiTensor::zeros(self.shape.clone(), self.out);
        let mut count = 0i64;
        let mut pick = vec![0usize; blocks.len()];
        loop {
            let mut order: Vec<usize> = Vec::with_capacity(self.slots());
            let mut sign = 1i64;
            for (b, (deg, range)) in blocks.iter().enumerate() {
                let perm = &perms_per_block[b][pick[b]];
                order.extend(perm.images().iter().map(|&v| range.start + v - 1));
                if deg % 2 == 1 {
                    sign *= perm.sign() as i64;
                }
            }
            let term = self.permute_slots(&order);
            if sign == 1 {
                acc.add_assign(&term).expect("same layout");
            } else {
                acc.add_assign(&term.neg()).expect("same layout");
            }
            count += 1;
            if !advance(&mut pick, |b| perms_per_block[b].len()) {
                break;
            }
        }
        acc.scale(&frac(1, count))
    }

    pub fn max_abs(&self) -> Rational {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }
}

/// Odometer increment; returns false after the last index.
pub(crate) fn advance(idx: &mut [usize], bound: impl Fn(usize) -> usize) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < bound(k) {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// Calls `f` on every multi-index below `dims`, in row-major order.
pub fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        if !advance(&mut idx, |k| dims[k]) {
            break;
        }
    }
}

/// One inner map feeding an outer map: the inner tensor and the slots of the
/// result it consumes, in order.
pub struct Inner<'a> {
    pub map: &'a MultiTensor,
    pub slots: Vec<usize>,
}

/// `acc += sign · outer ∘ (inner_1, …, inner_l)`, where inner `j` consumes the
/// listed slots of `acc` and its output feeds slot `j` of `outer`.
pub fn accumulate_composite(acc: &mut MultiTensor, sign: &Rational, outer: &MultiTensor, inners: &[Inner<'_>]) {
    debug_assert_eq!(outer.slots(), inners.len());
    debug_assert_eq!(outer.out_dim(), acc.out_dim());
    if outer.is_zero() || inners.iter().any(|i| i.map.is_zero()) {
        return;
    }
    let dims = acc.dims().to_vec();
    let out = acc.out_dim();
    let mut sub: Vec<Vec<usize>> = inners.iter().map(|i| vec![0; i.slots.len()]).collect();
    for_each_index(&dims, |index| {
        for (j, inner) in inners.iter().enumerate() {
            for (k, &slot) in inner.slots.iter().enumerate() {
                sub[j][k] = index[slot];
            }
        }
        let cols: Vec<&[Rational]> = inners.iter().zip(&sub).map(|(inner, s)| inner.map.column(s)).collect();
        let at = acc.position(index, 0);
        outer.accumulate(&cols, sign, &mut acc.coeffs[at..at + out]);
    });
}

/// ξ_1 ⊙ … ⊙ ξ_l for scalar-valued graded-symmetric sections.
///
/// Degree-0 factors act by scalar multiplication.
pub fn graded_product(factors: &[&MultiTensor]) -> Result<MultiTensor> {
    let mut scalar = Rational::one();
    let mut proper: Vec<&MultiTensor> = Vec::new();
    for f in factors {
        if f.out_dim() != 1 {
            return Err(Error::ShapeMismatch("graded product of non-scalar-valued tensors".into()));
        }
        if f.slots() == 0 {
            scalar *= &f.coeffs[0];
        } else {
            proper.push(f);
        }
    }
    if proper.is_empty() {
        return Ok(MultiTensor::scalar(scalar));
    }
    let p_list: Vec<IntPartition> =
        proper.iter().map(|f| IntPartition::new(f.degrees().to_vec())).collect::<Result<_>>()?;
    let (p, splits) = enumerate_splits(&p_list)?;
    // slot dims come from the factors; equal degrees must agree
    let mut dim_of = std::collections::BTreeMap::new();
    for f in &proper {
        for (&deg, &dim) in f.degrees().iter().zip(f.dims()) {
            if let Some(&prev) = dim_of.get(&deg) {
                if prev != dim {
                    return Err(Error::ShapeMismatch(format!("degree {deg} has dims {prev} and {dim}")));
                }
            }
            dim_of.insert(deg, dim);
        }
    }
    let shape = GradedShape { degrees: p.parts().to_vec(), dims: p.parts().iter().map(|d| dim_of[d]).collect() };
    let mut result = MultiTensor::zeros(shape, 1);
    let dims = result.dims().to_vec();
    let signs: Vec<Rational> = splits.iter().map(|s| int(s.sign as i64)).collect();
    let mut sub: Vec<usize> = Vec::new();
    for_each_index(&dims, |index| {
        let mut total = Rational::zero();
        for (split, sign) in splits.iter().zip(&signs) {
            let mut term = sign.clone();
            for (j, group) in split.groups.iter().enumerate() {
                sub.clear();
                sub.extend(group.iter().map(|&b| index[b]));
                let c = proper[j].get(&sub, 0);
                if c.is_zero() {
                    term = Rational::zero();
                    break;
                }
                term *= c;
            }
            total += term;
        }
        result.set(index, 0, total * &scalar);
    });
    Ok(result)
}

/// Inverse of a square linear map, or `None` if it is singular.
pub fn linear_inverse(map: &MultiTensor) -> Option<MultiTensor> {
    if map.slots() != 1 || map.dims()[0] != map.out_dim() {
        return None;
    }
    let d = map.out_dim();
    // m[row=o][col=i] = coefficient of e_o in map(e_i)
    let mut m: Vec<Vec<Rational>> =
        (0..d).map(|o| (0..d).map(|i| map.get(&[i], o).clone()).collect()).collect();
    let mut inv: Vec<Vec<Rational>> =
        (0..d).map(|r| (0..d).map(|c| if r == c { Rational::one() } else { Rational::zero() }).collect()).collect();
    for col in 0..d {
        let pivot = (col..d).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].clone();
        for c in 0..d {
            m[col][c] /= &p;
            inv[col][c] /= &p;
        }
        for r in 0..d {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..d {
                    let a = &m[col][c] * &f;
                    m[r][c] -= a;
                    let b = &inv[col][c] * &f;
                    inv[r][c] -= b;
                }
            }
        }
    }
    let mut result = MultiTensor::zeros(map.shape().clone(), d);
    for o in 0..d {
        for i in 0..d {
            result.set(&[i], o, inv[o][i].clone());
        }
    }
    Some(result)
}

impl fmt::Display for MultiTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[usize]| {
            if v.is_empty() {
                "-".to_string()
            } else {
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            }
        };
        writeln!(f, "tensor degrees={} dims={} out={}", list(self.degrees()), list(self.dims()), self.out)?;
        if self.coeffs.is_empty() {
            return write!(f, "-");
        }
        let coeffs: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        write!(f, "{}", coeffs.join(" "))
    }
}

impl MultiTensor {
    /// Parse the two-line block written by `Display`.
    pub fn parse_block(header: &str, body: &str) -> Result<MultiTensor> {
        let mut degrees = None;
        let mut dims = None;
        let mut out = None;
        let mut words = header.split_whitespace();
        if words.next() != Some("tensor") {
            return Err(Error::Parse { line: 0, msg: format!("expected a tensor header, got {header:?}") });
        }
        let list = |v: &str| -> Result<Vec<usize>> {
            if v == "-" {
                return Ok(Vec::new());
            }
            v.split(',')
                .map(|x| x.parse().map_err(|_| Error::Parse { line: 0, msg: format!("bad integer {x:?}") }))
                .collect()
        };
        for w in words {
            let (k, v) = w.split_once('=').ok_or(Error::Parse { line: 0, msg: format!("bad field {w:?}") })?;
            match k {
                "degrees" => degrees = Some(list(v)?),
                "dims" => dims = Some(list(v)?),
                "out" => {
                    out = Some(v.parse().map_err(|_| Error::Parse { line: 0, msg: format!("bad out {v:?}") })?)
                }
                _ => return Err(Error::Parse { line: 0, msg: format!("unknown field {k:?}") }),
            }
        }
        let missing = |what: &str| Error::Parse { line: 0, msg: format!("tensor header lacks {what}") };
        let shape = GradedShape::new(degrees.ok_or_else(|| missing("degrees"))?, dims.ok_or_else(|| missing("dims"))?)?;
        let coeffs = if body.trim() == "-" {
            Vec::new()
        } else {
            body.split_whitespace().map(parse_rational).collect::<Result<Vec<_>>>()?
        };
        MultiTensor::from_coeffs(shape, out.ok_or_else(|| missing("out"))?, coeffs)
    }
}
