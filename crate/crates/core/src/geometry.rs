//! Point-set primitives: separation distance, enclosing radius, norm ordering,
//! and the labeled dataset types consumed by every other module.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{vecops, Scalar};

/// Class membership of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Pos,
    #[serde(rename = "-1")]
    Neg,
}

impl Sign {
    #[inline]
    pub fn value<T: Scalar>(self) -> T {
        match self {
            Sign::Pos => T::one(),
            Sign::Neg => -T::one(),
        }
    }

    #[inline]
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    #[inline]
    pub fn opposite(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

fn check_points<T: Scalar>(points: &[Vec<T>], dim: usize, what: &'static str) -> Result<()> {
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(what));
        }
    }
    Ok(())
}

/// Exact minimum Euclidean distance over all cross pairs.
pub fn min_pairwise_separation<T: Scalar>(pos: &[Vec<T>], neg: &[Vec<T>]) -> Result<T> {
    if pos.is_empty() {
        return Err(Error::EmptyClass("positive".into()));
    }
    if neg.is_empty() {
        return Err(Error::EmptyClass("negative".into()));
    }
    let dim = pos[0].len();
    check_points(pos, dim, "positive points")?;
    check_points(neg, dim, "negative points")?;
    let mut best = T::infinity();
    for p in pos {
        for q in neg {
            let d = vecops::dist_sq(p, q);
            if d < best {
                best = d;
            }
        }
    }
    Ok(best.sqrt())
}

/// Largest Euclidean norm in the list.
pub fn enclosing_radius<T: Scalar>(points: &[Vec<T>]) -> Result<T> {
    if points.is_empty() {
        return Err(Error::EmptyInput("enclosing_radius"));
    }
    Ok(points
        .iter()
        .map(|p| vecops::norm(p))
        .fold(T::zero(), |a, b| if b > a { b } else { a }))
}

/// Removes exact coordinate duplicates, keeping the first occurrence.
pub(crate) fn dedup_points<T: Scalar>(points: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| vecops::lex_cmp(&points[a], &points[b]).then(a.cmp(&b)));
    let mut keep = vec![true; points.len()];
    for w in idx.windows(2) {
        if points[w[0]] == points[w[1]] {
            // w[1] sorts after w[0] among equals, so it is the later occurrence.
            keep[w[1]] = false;
        }
    }
    points
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// Two finite point sets `X+`, `X-` with cached separation, radius and size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct LabeledDataset<T> {
    points_pos: Vec<Vec<T>>,
    points_neg: Vec<Vec<T>>,
    dim: usize,
    delta: T,
    radius: T,
    n_total: usize,
}

impl<T: Scalar> LabeledDataset<T> {
    /// Validates and caches `delta`, `R` and `N`.
    ///
    /// Coincident points within a class are collapsed; a point present in both
    /// classes is rejected. One class may be empty, in which case `delta` is
    /// `+inf`.
    pub fn new(points_pos: Vec<Vec<T>>, points_neg: Vec<Vec<T>>) -> Result<Self> {
        let dim = points_pos
            .first()
            .or_else(|| points_neg.first())
            .map(|p| p.len())
            .ok_or(Error::EmptyInput("dataset"))?;
        if dim == 0 {
            return Err(Error::InvalidShape("points must have at least one coordinate".into()));
        }
        check_points(&points_pos, dim, "positive points")?;
        check_points(&points_neg, dim, "negative points")?;
        let points_pos = dedup_points(points_pos);
        let points_neg = dedup_points(points_neg);

        let mut delta_sq = T::infinity();
        for (i, p) in points_pos.iter().enumerate() {
            for (j, q) in points_neg.iter().enumerate() {
                let d = vecops::dist_sq(p, q);
                if d == T::zero() {
                    return Err(Error::CoincidentAcrossClasses { pos: i, neg: j });
                }
                if d < delta_sq {
                    delta_sq = d;
                }
            }
        }
        let radius = points_pos
            .iter()
            .chain(&points_neg)
            .map(|p| vecops::norm(p))
            .fold(T::zero(), |a, b| if b > a { b } else { a });
        let n_total = points_pos.len() + points_neg.len();
        Ok(Self {
            points_pos,
            points_neg,
            dim,
            delta: delta_sq.sqrt(),
            radius,
            n_total,
        })
    }

    pub fn points_pos(&self) -> &[Vec<T>] {
        &self.points_pos
    }

    pub fn points_neg(&self) -> &[Vec<T>] {
        &self.points_neg
    }

    pub fn points(&self, sign: Sign) -> &[Vec<T>] {
        match sign {
            Sign::Pos => &self.points_pos,
            Sign::Neg => &self.points_neg,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// The separation theory assumes `d >= 2`; smaller inputs still run but carry no guarantee.
    pub fn has_theoretical_guarantee(&self) -> bool {
        self.dim >= 2
    }

    /// Errors unless both classes are non-empty.
    pub fn require_both_classes(&self) -> Result<()> {
        if self.points_pos.is_empty() {
            return Err(Error::EmptyClass("positive".into()));
        }
        if self.points_neg.is_empty() {
            return Err(Error::EmptyClass("negative".into()));
        }
        Ok(())
    }

    /// All points with their sign and within-class index, positives first.
    pub fn iter_signed(&self) -> impl Iterator<Item = (Sign, usize, &[T])> {
        self.points_pos
            .iter()
            .enumerate()
            .map(|(i, p)| (Sign::Pos, i, p.as_slice()))
            .chain(
                self.points_neg
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (Sign::Neg, i, p.as_slice())),
            )
    }

    /// Same dataset in another scalar type.
    pub fn convert<U: Scalar>(&self) -> Result<LabeledDataset<U>> {
        LabeledDataset::new(
            self.points_pos.iter().map(|p| vecops::convert(p)).collect(),
            self.points_neg.iter().map(|p| vecops::convert(p)).collect(),
        )
    }
}

/// One entry of a norm-ordered point list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct OrderedEntry<T> {
    pub point: Vec<T>,
    pub sign: Sign,
    /// Index within the point's class in the source dataset.
    pub index: usize,
}

/// Points sorted by descending norm; ties broken lexicographically, then by class and index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct OrderedPoints<T> {
    pub entries: Vec<OrderedEntry<T>>,
}

impl<T: Scalar> OrderedPoints<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Indices `j > i` whose sign differs from entry `i`.
    pub fn lower_opposite(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let s = self.entries[i].sign;
        (i + 1..self.entries.len()).filter(move |&j| self.entries[j].sign != s)
    }
}

fn entry_cmp<T: Scalar>(a: &(T, OrderedEntry<T>), b: &(T, OrderedEntry<T>)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then_with(|| vecops::lex_cmp(&a.1.point, &b.1.point))
        .then_with(|| a.1.sign.as_i8().cmp(&b.1.sign.as_i8()).reverse())
        .then_with(|| a.1.index.cmp(&b.1.index))
}

fn order_entries<T: Scalar>(entries: Vec<OrderedEntry<T>>) -> OrderedPoints<T> {
    let mut keyed: Vec<(T, OrderedEntry<T>)> = entries
        .into_iter()
        .map(|e| (vecops::norm_sq(&e.point), e))
        .collect();
    keyed.sort_by(entry_cmp);
    OrderedPoints {
        entries: keyed.into_iter().map(|(_, e)| e).collect(),
    }
}

/// Orders all dataset points by descending Euclidean norm.
pub fn norm_order<T: Scalar>(ds: &LabeledDataset<T>) -> OrderedPoints<T> {
    order_entries(
        ds.iter_signed()
            .map(|(sign, index, p)| OrderedEntry {
                point: p.to_vec(),
                sign,
                index,
            })
            .collect(),
    )
}

/// Re-sorts an existing ordering; a fixed point for any output of [`norm_order`].
pub fn reorder<T: Scalar>(ordered: &OrderedPoints<T>) -> OrderedPoints<T> {
    order_entries(ordered.entries.clone())
}

/// `l` labeled point clouds in a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct MulticlassDataset<T> {
    classes: Vec<Vec<Vec<T>>>,
    dim: usize,
}

impl<T: Scalar> MulticlassDataset<T> {
    pub fn new(classes: Vec<Vec<Vec<T>>>) -> Result<Self> {
        let dim = classes
            .iter()
            .flatten()
            .next()
            .map(|p| p.len())
            .ok_or(Error::EmptyInput("multiclass dataset"))?;
        for (c, pts) in classes.iter().enumerate() {
            if pts.is_empty() {
                return Err(Error::EmptyClass(format!("class {c}")));
            }
            check_points(pts, dim, "class points")?;
        }
        Ok(Self { classes, dim })
    }

    pub fn classes(&self) -> &[Vec<Vec<T>>] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_total(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    pub fn radius(&self) -> T {
        self.classes
            .iter()
            .flatten()
            .map(|p| vecops::norm(p))
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Minimum distance between points of different classes (`+inf` for one class).
    pub fn min_cross_class_distance(&self) -> T {
        let mut best = T::infinity();
        for (a, ca) in self.classes.iter().enumerate() {
            for cb in &self.classes[a + 1..] {
                for p in ca {
                    for q in cb {
                        let d = vecops::dist_sq(p, q);
                        if d < best {
                            best = d;
                        }
                    }
                }
            }
        }
        best.sqrt()
    }

    /// Class `c` against the union of all others.
    pub fn one_vs_rest(&self, c: usize) -> Result<LabeledDataset<T>> {
        let pos = self.classes[c].clone();
        let neg = self
            .classes
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != c)
            .flat_map(|(_, pts)| pts.iter().cloned())
            .collect();
        LabeledDataset::new(pos, neg)
    }

    /// Flattened points with their class labels.
    pub fn labeled_points(&self) -> Vec<(usize, &[T])> {
        self.classes
            .iter()
            .enumerate()
            .flat_map(|(c, pts)| pts.iter().map(move |p| (c, p.as_slice())))
            .collect()
    }
}

/// Contents of a dataset CSV file.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetFile<T> {
    Binary(LabeledDataset<T>),
    Multiclass(MulticlassDataset<T>),
}

impl<T: Scalar> DatasetFile<T> {
    /// Two-class view: a binary file as is, or a multiclass file with exactly two
    /// classes where class 1 is positive and class 0 negative.
    pub fn into_binary(self) -> Result<LabeledDataset<T>> {
        match self {
            DatasetFile::Binary(ds) => Ok(ds),
            DatasetFile::Multiclass(m) if m.n_classes() == 2 => {
                LabeledDataset::new(m.classes[1].clone(), m.classes[0].clone())
            }
            DatasetFile::Multiclass(m) => Err(Error::InvalidConfig(format!(
                "two-class dataset required, file has {} classes",
                m.n_classes()
            ))),
        }
    }

    pub fn into_multiclass(self) -> Result<MulticlassDataset<T>> {
        match self {
            DatasetFile::Multiclass(m) => Ok(m),
            DatasetFile::Binary(ds) => {
                MulticlassDataset::new(vec![ds.points_pos.clone(), ds.points_neg.clone()])
            }
        }
    }
}

/// Parses `label,x0,...,x{d-1}` CSV. Labels `+1`/`-1` (with at least one `-1`)
/// give a two-class dataset; non-negative integer labels give a multiclass one.
pub fn read_csv<T: Scalar, R: std::io::Read>(reader: R) -> Result<DatasetFile<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || &headers[0] != "label" {
        return Err(Error::Parse("header must start with `label`".into()));
    }
    let dim = headers.len() - 1;
    if dim == 0 {
        return Err(Error::Parse("no coordinate columns".into()));
    }
    for (k, h) in headers.iter().skip(1).enumerate() {
        if h != format!("x{k}") {
            return Err(Error::Parse(format!("column {} must be named x{k}, found {h}", k + 1)));
        }
    }
    let mut rows: Vec<(i64, Vec<T>)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != dim + 1 {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                line + 1,
                rec.len(),
                dim + 1
            )));
        }
        let label: i64 = rec[0]
            .trim_start_matches('+')
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: bad label {:?}", line + 1, &rec[0])))?;
        let coords = rec
            .iter()
            .skip(1)
            .map(|s| {
                s.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::Parse(format!("row {}: bad coordinate {s:?}", line + 1)))
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push((label, coords));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("dataset file"));
    }
    let binary = rows.iter().all(|(l, _)| *l == 1 || *l == -1) && rows.iter().any(|(l, _)| *l == -1);
    if binary {
        let (pos, neg): (Vec<_>, Vec<_>) = rows.into_iter().partition(|(l, _)| *l == 1);
        return Ok(DatasetFile::Binary(LabeledDataset::new(
            pos.into_iter().map(|r| r.1).collect(),
            neg.into_iter().map(|r| r.1).collect(),
        )?));
    }
    if let Some((l, _)) = rows.iter().find(|(l, _)| *l < 0) {
        return Err(Error::Parse(format!("multiclass labels must be non-negative, found {l}")));
    }
    let n_classes = rows.iter().map(|(l, _)| *l as usize).max().unwrap_or(0) + 1;
    let mut classes = vec![Vec::new(); n_classes];
    for (l, p) in rows {
        classes[l as usize].push(p);
    }
    Ok(DatasetFile::Multiclass(MulticlassDataset::new(classes)?))
}

pub fn load_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<DatasetFile<T>> {
    read_csv(std::fs::File::open(path)?)
}

fn write_rows<T: Scalar, W: std::io::Write>(
    writer: W,
    dim: usize,
    rows: impl Iterator<Item = (String, Vec<T>)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["label".to_string()];
    header.extend((0..dim).map(|k| format!("x{k}")));
    w.write_record(&header)?;
    for (label, p) in rows {
        let mut rec = vec![label];
        rec.extend(p.iter().map(|c| format!("{}", c.as_f64())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_binary_csv<T: Scalar, W: std::io::Write>(ds: &LabeledDataset<T>, writer: W) -> Result<()> {
    write_rows(
        writer,
        ds.dim(),
        ds.iter_signed().map(|(s, _, p)| {
            (if s == Sign::Pos { "+1" } else { "-1" }.to_string(), p.to_vec())
        }),
    )
}

pub fn write_multiclass_csv<T: Scalar, W: std::io::Write>(
    ds: &MulticlassDataset<T>,
    writer: W,
) -> Result<()> {
    write_rows(
        writer,
        ds.dim(),
        ds.labeled_points().into_iter().map(|(c, p)| (c.to_string(), p.to_vec())),
    )
}
