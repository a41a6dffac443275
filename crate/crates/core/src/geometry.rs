//! Weighted planar locations, distance-power costs and cluster coverage.
//!
//! Identical points are collapsed into one `WeightedLocation` whose weight is
//! the point multiplicity. Coordinates are stored in units of `r` and use the
//! extended range as well, since the i-th cluster sits near x = 2^i.

use std::fmt;
use std::io;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::numeric::{ExtScalar, NumericError};

/// Signed extended-range coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coord {
    negative: bool,
    magnitude: ExtScalar,
}

impl Coord {
    pub const ZERO: Coord = Coord {
        negative: false,
        magnitude: ExtScalar::ZERO,
    };

    pub fn new(negative: bool, magnitude: ExtScalar) -> Self {
        Self {
            negative: negative && !magnitude.is_zero(),
            magnitude,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        Self::new(v < 0.0, ExtScalar::from_f64(v.abs()))
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn magnitude(&self) -> ExtScalar {
        self.magnitude
    }

    /// |self - other|.
    pub fn distance_to(&self, other: &Coord) -> ExtScalar {
        if self.negative == other.negative {
            self.magnitude.abs_diff(other.magnitude)
        } else {
            self.magnitude + other.magnitude
        }
    }

    pub fn to_f64_lossy(&self) -> f64 {
        let v = self.magnitude.to_f64_lossy();
        if self.negative {
            -v
        } else {
            v
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        write!(f, "{}", self.magnitude)
    }
}

impl FromStr for Coord {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.strip_prefix('-') {
            Some(rest) => Ok(Coord::new(true, rest.parse()?)),
            None => Ok(Coord::new(false, s.parse()?)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Top,
    Bottom,
}

impl End {
    pub fn as_str(&self) -> &'static str {
        match self {
            End::Top => "top",
            End::Bottom => "bottom",
        }
    }
}

impl FromStr for End {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" => Ok(End::Top),
            "bottom" => Ok(End::Bottom),
            other => Err(Error::Malformed(format!("unknown end_id {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    KMeans,
    KMedian,
}

impl Variant {
    pub fn cost_exponent(&self) -> CostExponent {
        match self {
            Variant::KMeans => CostExponent::Squared,
            Variant::KMedian => CostExponent::Linear,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::KMeans => "kmeans",
            Variant::KMedian => "kmedian",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Variant::KMeans),
            "kmedian" => Ok(Variant::KMedian),
            other => Err(invalid(format!("unknown variant {other:?}"))),
        }
    }
}

/// The power ℓ applied to Euclidean distance: 1 for k-median, 2 for k-means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CostExponent {
    Linear,
    Squared,
}

impl CostExponent {
    pub fn from_int(l: u32) -> Result<Self> {
        match l {
            1 => Ok(CostExponent::Linear),
            2 => Ok(CostExponent::Squared),
            other => Err(invalid(format!("cost exponent must be 1 or 2, got {other}"))),
        }
    }

    pub fn as_int(&self) -> u32 {
        match self {
            CostExponent::Linear => 1,
            CostExponent::Squared => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedLocation {
    pub x: Coord,
    pub y: Coord,
    /// Number of points collapsed at this location.
    pub weight: ExtScalar,
    /// 1-based optimal cluster index.
    pub cluster_id: usize,
    pub end: End,
}

/// Euclidean distance between two locations raised to ℓ, in units of r^ℓ.
pub fn dist_pow(p: &WeightedLocation, q: &WeightedLocation, exponent: CostExponent) -> ExtScalar {
    let dx = p.x.distance_to(&q.x);
    let dy = p.y.distance_to(&q.y);
    let squared = dx.square() + dy.square();
    match exponent {
        CostExponent::Squared => squared,
        CostExponent::Linear => squared.sqrt(),
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    locations: Vec<WeightedLocation>,
    k: usize,
    m: f64,
    r: f64,
    variant: Variant,
}

impl Instance {
    /// Checks the structural invariants: 2k positive-weight locations, cluster
    /// ids 1..=k each appearing once per end.
    pub fn new(
        locations: Vec<WeightedLocation>,
        k: usize,
        m: f64,
        r: f64,
        variant: Variant,
    ) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be >= 1"));
        }
        if !(m.is_finite() && m >= 1.0) {
            return Err(invalid(format!("m must be a finite real >= 1, got {m}")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid(format!("r must be a finite real > 0, got {r}")));
        }
        if locations.len() != 2 * k {
            return Err(invalid(format!(
                "expected {} locations for k={k}, got {}",
                2 * k,
                locations.len()
            )));
        }
        let mut seen = vec![[false; 2]; k];
        for loc in &locations {
            if loc.weight.is_zero() {
                return Err(invalid("location weights must be positive"));
            }
            if !(1..=k).contains(&loc.cluster_id) {
                return Err(invalid(format!("cluster_id {} outside 1..={k}", loc.cluster_id)));
            }
            let slot = &mut seen[loc.cluster_id - 1][loc.end as usize];
            if *slot {
                return Err(invalid(format!(
                    "cluster {} has two {} locations",
                    loc.cluster_id,
                    loc.end.as_str()
                )));
            }
            *slot = true;
        }
        Ok(Self {
            locations,
            k,
            m,
            r,
            variant,
        })
    }

    pub fn locations(&self) -> &[WeightedLocation] {
        &self.locations
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn cost_exponent(&self) -> CostExponent {
        self.variant.cost_exponent()
    }

    /// r^ℓ, converting distances in units of r into absolute costs.
    pub fn distance_scale(&self) -> ExtScalar {
        ExtScalar::from_f64(self.r).powi(self.cost_exponent().as_int() as u64)
    }

    /// Index of the location for `(cluster_id, end)`.
    pub fn index_of(&self, cluster_id: usize, end: End) -> Option<usize> {
        self.locations
            .iter()
            .position(|l| l.cluster_id == cluster_id && l.end == end)
    }

    pub fn total_weight(&self) -> ExtScalar {
        self.locations.iter().map(|l| l.weight).sum()
    }

    /// Writes `cluster_id,end_id,x,y,weight` rows, coordinates in units of r.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cluster_id", "end_id", "x", "y", "weight"])?;
        for l in &self.locations {
            w.write_record([
                l.cluster_id.to_string(),
                l.end.as_str().to_string(),
                l.x.to_string(),
                l.y.to_string(),
                l.weight.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads the rows written by [`Instance::write_csv`].
pub fn read_locations_csv<R: io::Read>(input: R) -> Result<Vec<WeightedLocation>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers != vec!["cluster_id", "end_id", "x", "y", "weight"] {
        return Err(Error::Malformed(format!("unexpected instance header {headers:?}")));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let malformed = |what: &str| Error::Malformed(format!("bad {what} in row {row:?}"));
        out.push(WeightedLocation {
            cluster_id: field(0).parse().map_err(|_| malformed("cluster_id"))?,
            end: field(1).parse()?,
            x: field(2).parse().map_err(|_| malformed("x"))?,
            y: field(3).parse().map_err(|_| malformed("y"))?,
            weight: field(4).parse().map_err(|_| malformed("weight"))?,
        });
    }
    Ok(out)
}

/// Ordered list of distinct location indices chosen as centers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CenterSet {
    indices: Vec<usize>,
}

impl CenterSet {
    pub fn new(indices: Vec<usize>, num_locations: usize) -> Result<Self> {
        let mut set = Self::default();
        for i in indices {
            set.push(i, num_locations)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, index: usize, num_locations: usize) -> Result<()> {
        if index >= num_locations {
            return Err(invalid(format!(
                "center index {index} out of range for {num_locations} locations"
            )));
        }
        if self.indices.contains(&index) {
            return Err(invalid(format!("center index {index} chosen twice")));
        }
        self.indices.push(index);
        Ok(())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Weighted cost of every location w.r.t. its nearest center, absolute units.
pub fn location_costs(inst: &Instance, centers: &CenterSet) -> Result<Vec<ExtScalar>> {
    if centers.is_empty() {
        return Err(invalid("cost needs at least one center"));
    }
    let locs = inst.locations();
    let exponent = inst.cost_exponent();
    let scale = inst.distance_scale();
    Ok(locs
        .iter()
        .map(|p| {
            let nearest = centers
                .indices()
                .iter()
                .map(|&c| dist_pow(p, &locs[c], exponent))
                .min()
                .expect("centers nonempty");
            p.weight * nearest * scale
        })
        .collect())
}

/// φ_C(X): sum over locations of weight times distance^ℓ to the nearest center.
pub fn cost(inst: &Instance, centers: &CenterSet) -> Result<ExtScalar> {
    Ok(location_costs(inst, centers)?.into_iter().sum())
}

/// Cost attributed to each optimal cluster (index 0 is cluster 1).
pub fn cluster_costs(inst: &Instance, centers: &CenterSet) -> Result<Vec<ExtScalar>> {
    let per_location = location_costs(inst, centers)?;
    let mut out = vec![ExtScalar::ZERO; inst.k()];
    for (loc, c) in inst.locations().iter().zip(per_location) {
        out[loc.cluster_id - 1] += c;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub count: usize,
    /// `flags[j]` is set iff cluster j+1 holds a center.
    pub flags: Vec<bool>,
}

pub fn coverage(inst: &Instance, centers: &CenterSet) -> Coverage {
    let mut flags = vec![false; inst.k()];
    for &c in centers.indices() {
        flags[inst.locations()[c].cluster_id - 1] = true;
    }
    Coverage {
        count: flags.iter().filter(|&&f| f).count(),
        flags,
    }
}
