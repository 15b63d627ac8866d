//! Exact polytope geometry for the toric Futaki criterion: rational
//! volumes and barycenters via simplicial decomposition, with the
//! VANISHES / NONZERO sign decision made in exact arithmetic.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    /// Exact hull vertices; dimension 1 sorted, dimension 2 in
    /// counter-clockwise hull order.
    pub vertices: Vec<Vec<Rat>>,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FutakiVerdict {
    Vanishes,
    /// Unit-free obstruction direction: the exact barycenter.
    Nonzero(Vec<Rat>),
}

fn rat_from_f64(x: f64) -> Result<Rat> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::MalformedFile(format!("non-finite coordinate {x}")))
}

fn parse_coord(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_integer(BigInt::from(i)))
            } else if let Some(f) = n.as_f64() {
                rat_from_f64(f)
            } else {
                Err(Error::MalformedFile(format!("unrepresentable number {n}")))
            }
        }
        Value::String(s) => {
            let mut parts = s.splitn(2, '/');
            let p: BigInt = parts
                .next()
                .unwrap()
                .trim()
                .parse()
                .map_err(|_| Error::MalformedFile(format!("bad rational `{s}`")))?;
            let q: BigInt = match parts.next() {
                Some(q) => q
                    .trim()
                    .parse()
                    .map_err(|_| Error::MalformedFile(format!("bad rational `{s}`")))?,
                None => BigInt::from(1),
            };
            if q.is_zero() {
                return Err(Error::MalformedFile(format!("zero denominator in `{s}`")));
            }
            Ok(Rat::new(p, q))
        }
        other => Err(Error::MalformedFile(format!("coordinate must be a number or \"p/q\", got {other}"))),
    }
}

/// Parses `{"vertices": [[q, ...], ...]}` and canonicalizes the hull.
pub fn load_polytope(source: &str) -> Result<Polytope> {
    let doc: Value =
        serde_json::from_str(source).map_err(|e| Error::MalformedFile(e.to_string()))?;
    let verts = doc
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedFile("missing `vertices` array".into()))?;
    if verts.is_empty() {
        return Err(Error::MalformedFile("empty vertex list".into()));
    }
    let mut points = Vec::with_capacity(verts.len());
    let mut dim = None;
    for v in verts {
        let row = v
            .as_array()
            .ok_or_else(|| Error::MalformedFile("vertex is not an array".into()))?;
        let p: Vec<Rat> = row.iter().map(parse_coord).collect::<Result<_>>()?;
        match dim {
            None => dim = Some(p.len()),
            Some(d) if d != p.len() => {
                return Err(Error::MalformedFile("inconsistent vertex dimensions".into()))
            }
            _ => {}
        }
        points.push(p);
    }
    canonicalize(points)
}

/// Signed twice-area of the triangle (o, a, b).
fn cross(o: &[Rat], a: &[Rat], b: &[Rat]) -> Rat {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Deduplicates, strips non-extreme points, orients the hull.
pub fn canonicalize(mut points: Vec<Vec<Rat>>) -> Result<Polytope> {
    let dimension = points.first().map(|p| p.len()).unwrap_or(0);
    points.sort();
    points.dedup();
    match dimension {
        1 => {
            if points.len() < 2 {
                return Err(Error::DegeneratePolytope("an interval needs two distinct endpoints".into()));
            }
            let lo = points.first().unwrap().clone();
            let hi = points.last().unwrap().clone();
            Ok(Polytope { vertices: vec![lo, hi], dimension })
        }
        2 => {
            if points.len() < 3 {
                return Err(Error::DegeneratePolytope("a polygon needs three affinely independent vertices".into()));
            }
            // Andrew monotone chain on the lexicographically sorted points
            let mut lower: Vec<Vec<Rat>> = Vec::new();
            for p in &points {
                while lower.len() >= 2
                    && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive()
                {
                    lower.pop();
                }
                lower.push(p.clone());
            }
            let mut upper: Vec<Vec<Rat>> = Vec::new();
            for p in points.iter().rev() {
                while upper.len() >= 2
                    && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive()
                {
                    upper.pop();
                }
                upper.push(p.clone());
            }
            lower.pop();
            upper.pop();
            lower.extend(upper);
            if lower.len() < 3 {
                return Err(Error::DegeneratePolytope("all points are collinear".into()));
            }
            Ok(Polytope { vertices: lower, dimension })
        }
        0 => Err(Error::DegeneratePolytope("zero-dimensional input".into())),
        d => Err(Error::Unsupported(format!(
            "moment polytopes are supported in dimensions 1 and 2, got {d}"
        ))),
    }
}

/// Exact Lebesgue volume (length / area) by fanning from vertex 0.
pub fn volume(p: &Polytope) -> Rat {
    match p.dimension {
        1 => &p.vertices[1][0] - &p.vertices[0][0],
        2 => {
            let o = &p.vertices[0];
            let mut two_area = Rat::zero();
            for w in p.vertices[1..].windows(2) {
                two_area += cross(o, &w[0], &w[1]);
            }
            two_area / Rat::from_integer(BigInt::from(2))
        }
        _ => unreachable!("canonicalize rejects other dimensions"),
    }
}

/// Exact centroid: the volume-weighted average of simplex centroids in
/// the fan decomposition (the result is decomposition-independent).
pub fn barycenter(p: &Polytope) -> Vec<Rat> {
    barycenter_fanned(p, 0)
}

/// Same centroid fanned from an arbitrary hull vertex; exposed so the
/// decomposition-independence property is directly testable.
pub fn barycenter_fanned(p: &Polytope, fan_vertex: usize) -> Vec<Rat> {
    match p.dimension {
        1 => vec![(&p.vertices[0][0] + &p.vertices[1][0]) / Rat::from_integer(BigInt::from(2))],
        2 => {
            let k = p.vertices.len();
            let o = &p.vertices[fan_vertex % k];
            let three = Rat::from_integer(BigInt::from(3));
            let mut two_area = Rat::zero();
            let mut moment = vec![Rat::zero(), Rat::zero()];
            for i in 0..k {
                let a = &p.vertices[i];
                let b = &p.vertices[(i + 1) % k];
                let c = cross(o, a, b);
                for j in 0..2 {
                    moment[j] += &c * (&o[j] + &a[j] + &b[j]) / &three;
                }
                two_area += c;
            }
            moment.into_iter().map(|m| m / &two_area).collect()
        }
        _ => unreachable!("canonicalize rejects other dimensions"),
    }
}

/// Mabuchi criterion: the character vanishes iff the barycenter is at
/// the origin (within `tol`; pass 0 for exact rational inputs).
pub fn futaki_vanishes(p: &Polytope, tol: f64) -> FutakiVerdict {
    let b = barycenter(p);
    let norm_sq: f64 = b.iter().map(|c| rat_to_f64(c).powi(2)).sum();
    let exact_zero = b.iter().all(Zero::is_zero);
    if exact_zero || norm_sq.sqrt() <= tol {
        FutakiVerdict::Vanishes
    } else {
        FutakiVerdict::Nonzero(b)
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let p = r.numer();
    let q = r.denom();
    // exact for the magnitudes arising here; falls back to string parsing
    // only for pathological denominators
    match (p.to_string().parse::<f64>(), q.to_string().parse::<f64>()) {
        (Ok(a), Ok(b)) => a / b,
        _ => f64::NAN,
    }
}

/// Floating facade over the exact core.
pub fn volume_f64(p: &Polytope) -> f64 {
    rat_to_f64(&volume(p))
}

pub fn barycenter_f64(p: &Polytope) -> Vec<f64> {
    barycenter(p).iter().map(rat_to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> Rat {
        Rat::new(BigInt::from(p), BigInt::from(q))
    }

    fn poly(pts: &[(i64, i64)]) -> Polytope {
        canonicalize(
            pts.iter().map(|(x, y)| vec![rat(*x, 1), rat(*y, 1)]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn loads_and_canonicalizes() {
        let p = load_polytope(
            r#"{"vertices": [[-1,-1],[2,-1],[-1,2],[0,0],[-1,-1],[0.5,"-1/2"]]}"#,
        )
        .unwrap();
        assert_eq!(p.vertices.len(), 3, "interior and duplicate points removed");
        assert_eq!(volume(&p), rat(9, 2));
        assert!(barycenter(&p).iter().all(Zero::is_zero));

        assert!(matches!(
            load_polytope(r#"{"vertices": [[0,0],[1,1],[2,2]]}"#),
            Err(Error::DegeneratePolytope(_))
        ));
        assert!(matches!(
            load_polytope(r#"{"vertices": [[0,"1/0"]]}"#),
            Err(Error::MalformedFile(_))
        ));
        assert!(matches!(load_polytope("{}"), Err(Error::MalformedFile(_))));
        assert!(matches!(
            load_polytope(r#"{"vertices": [[0,0,0],[1,0,0],[0,1,0],[0,0,1]]}"#),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn classic_polygons() {
        let simplex = poly(&[(0, 0), (1, 0), (0, 1)]);
        assert_eq!(volume(&simplex), rat(1, 2));
        assert_eq!(barycenter(&simplex), vec![rat(1, 3), rat(1, 3)]);

        let square = poly(&[(1, 1), (1, -1), (-1, 1), (-1, -1)]);
        assert_eq!(volume(&square), rat(4, 1));
        assert_eq!(futaki_vanishes(&square, 0.0), FutakiVerdict::Vanishes);

        let triangle = poly(&[(-1, -1), (2, -1), (-1, 2)]);
        assert_eq!(futaki_vanishes(&triangle, 0.0), FutakiVerdict::Vanishes);

        // corner truncation at lattice distance 1: the blow-up polygon
        let trunc = poly(&[(-1, -1), (1, -1), (1, 0), (-1, 2)]);
        assert_eq!(volume(&trunc), rat(4, 1));
        match futaki_vanishes(&trunc, 0.0) {
            FutakiVerdict::Nonzero(b) => {
                assert_eq!(b, vec![rat(-1, 6), rat(1, 12)]);
            }
            v => panic!("expected NONZERO, got {v:?}"),
        }
    }

    #[test]
    fn interval_case() {
        let p = canonicalize(vec![vec![rat(-1, 1)], vec![rat(3, 1)], vec![rat(0, 1)]]).unwrap();
        assert_eq!(volume(&p), rat(4, 1));
        assert_eq!(barycenter(&p), vec![rat(1, 1)]);
    }

    #[test]
    fn float_facade_matches_exact() {
        let trunc = poly(&[(-1, -1), (1, -1), (1, 0), (-1, 2)]);
        assert!((volume_f64(&trunc) - 4.0).abs() <= 1e-14);
        let b = barycenter_f64(&trunc);
        assert!((b[0] + 1.0 / 6.0).abs() <= 1e-14);
        assert!((b[1] - 1.0 / 12.0).abs() <= 1e-14);
    }

    proptest! {
        #[test]
        fn decomposition_independence(pts in proptest::collection::vec((-9i64..10, -9i64..10), 3..9)) {
            let raw: Vec<Vec<Rat>> = pts.iter().map(|(x, y)| vec![rat(*x, 1), rat(*y, 1)]).collect();
            if let Ok(p) = canonicalize(raw) {
                let b0 = barycenter_fanned(&p, 0);
                for fv in 1..p.vertices.len() {
                    prop_assert_eq!(&b0, &barycenter_fanned(&p, fv));
                }
            }
        }

        #[test]
        fn affine_equivariance(
            pts in proptest::collection::vec((-6i64..7, -6i64..7), 3..8),
            t in (-3i64..4, -3i64..4, -3i64..4, -3i64..4, -5i64..6, -5i64..6),
        ) {
            let (a, b, c, d, e, f) = t;
            prop_assume!(a * d - b * c != 0);
            let raw: Vec<Vec<Rat>> = pts.iter().map(|(x, y)| vec![rat(*x, 1), rat(*y, 1)]).collect();
            if let Ok(p) = canonicalize(raw.clone()) {
                let mapped: Vec<Vec<Rat>> = raw
                    .iter()
                    .map(|v| vec![
                        rat(a, 1) * &v[0] + rat(b, 1) * &v[1] + rat(e, 1),
                        rat(c, 1) * &v[0] + rat(d, 1) * &v[1] + rat(f, 1),
                    ])
                    .collect();
                let q = canonicalize(mapped).unwrap();
                let bp = barycenter(&p);
                let want = vec![
                    rat(a, 1) * &bp[0] + rat(b, 1) * &bp[1] + rat(e, 1),
                    rat(c, 1) * &bp[0] + rat(d, 1) * &bp[1] + rat(f, 1),
                ];
                prop_assert_eq!(barycenter(&q), want);
            }
        }

        #[test]
        fn central_symmetry_zeroes_the_barycenter(pts in proptest::collection::vec((-9i64..10, -9i64..10), 2..7)) {
            let mut raw: Vec<Vec<Rat>> = Vec::new();
            for (x, y) in &pts {
                raw.push(vec![rat(*x, 1), rat(*y, 1)]);
                raw.push(vec![rat(-x, 1), rat(-y, 1)]);
            }
            if let Ok(p) = canonicalize(raw) {
                prop_assert!(barycenter(&p).iter().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let src = r#"{"vertices": [["-1/3","2/7"],[2,-1],[-1,2]]}"#;
        let p = load_polytope(src).unwrap();
        assert!(p.vertices.contains(&vec![rat(-1, 3), rat(2, 7)]));
    }
}
