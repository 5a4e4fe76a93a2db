use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::conformality::{holomorphic_battery, HermitianTargetMap, HolomorphicFunctionExpr};
use crate::error::{Error, Result};
use crate::geometry::{
    hopf_structure, ComplexStructureField, LckStructure, MetricField, VectorFieldExpr,
};
use crate::jetcalc::{DomainBox, Hyper, MapExpr, MapFn, Real, ScalarExprField};
use crate::maptension::RiemannianMap;
use crate::submanifolds::ParamSubmanifold;

/// A region excluded from sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exclusion {
    /// Points whose coordinates `from..to` have Euclidean norm below `radius`.
    NormBelow { from: usize, to: usize, radius: f64 },
}

impl Exclusion {
    pub fn excludes(&self, p: &[f64]) -> bool {
        match self {
            Exclusion::NormBelow { from, to, radius } => {
                p[*from..*to].iter().map(|v| v * v).sum::<f64>().sqrt() < *radius
            }
        }
    }
}

/// Sampling region: a box minus excluded loci.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDomain {
    pub bounds: DomainBox,
    #[serde(default)]
    pub exclusions: Vec<Exclusion>,
}

impl SampleDomain {
    pub fn new(bounds: DomainBox) -> Self {
        Self {
            bounds,
            exclusions: Vec::new(),
        }
    }

    pub fn excluding(mut self, e: Exclusion) -> Self {
        self.exclusions.push(e);
        self
    }

    pub fn accepts(&self, p: &[f64]) -> bool {
        self.bounds.contains(p) && !self.exclusions.iter().any(|e| e.excludes(p))
    }
}

/// Explicit fibre through a point: the fibre immersion and the parameter hitting the point.
pub type FibreFn = dyn Fn(&[f64]) -> Result<(ParamSubmanifold, Vec<f64>)> + Send + Sync;

#[derive(Clone)]
pub struct FibreFamily(pub Arc<FibreFn>);

impl std::fmt::Debug for FibreFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FibreFamily")
    }
}

/// A catalogue map, with its Hermitian view when the target carries a complex structure.
#[derive(Clone, Debug)]
pub struct NamedMap {
    pub riemannian: RiemannianMap,
    pub hermitian: Option<HermitianTargetMap>,
}

/// Named ingredients that scenario files may reference.
#[derive(Debug, Default)]
pub struct Catalogue {
    pub metrics: BTreeMap<String, MetricField>,
    pub complex: BTreeMap<String, ComplexStructureField>,
    pub lck: BTreeMap<String, LckStructure>,
    pub maps: BTreeMap<String, NamedMap>,
    pub fields: BTreeMap<String, VectorFieldExpr>,
    pub scalars: BTreeMap<String, ScalarExprField>,
    pub holomorphic: BTreeMap<String, Vec<HolomorphicFunctionExpr>>,
    pub submanifolds: BTreeMap<String, ParamSubmanifold>,
    pub fibres: BTreeMap<String, FibreFamily>,
    pub domains: BTreeMap<String, SampleDomain>,
    pub torus_maps: BTreeMap<String, MapExpr>,
}

fn get<'a, T>(m: &'a BTreeMap<String, T>, kind: &str, name: &str) -> Result<&'a T> {
    m.get(name).ok_or_else(|| Error::not_found(kind, name))
}

impl Catalogue {
    pub fn metric(&self, name: &str) -> Result<&MetricField> {
        get(&self.metrics, "metric", name)
    }
    pub fn complex_structure(&self, name: &str) -> Result<&ComplexStructureField> {
        get(&self.complex, "complex structure", name)
    }
    pub fn lck_structure(&self, name: &str) -> Result<&LckStructure> {
        get(&self.lck, "lcK structure", name)
    }
    pub fn map(&self, name: &str) -> Result<&NamedMap> {
        get(&self.maps, "map", name)
    }
    pub fn hermitian_map(&self, name: &str) -> Result<&HermitianTargetMap> {
        self.map(name)?
            .hermitian
            .as_ref()
            .ok_or_else(|| Error::not_found("Hermitian-target map", name))
    }
    pub fn field(&self, name: &str) -> Result<&VectorFieldExpr> {
        get(&self.fields, "vector field", name)
    }
    /// `None` means the zero field.
    pub fn optional_field(&self, name: Option<&str>) -> Result<Option<&VectorFieldExpr>> {
        name.map(|n| self.field(n)).transpose()
    }
    pub fn scalar(&self, name: &str) -> Result<&ScalarExprField> {
        get(&self.scalars, "scalar function", name)
    }
    pub fn holomorphic_family(&self, name: &str) -> Result<&[HolomorphicFunctionExpr]> {
        Ok(get(&self.holomorphic, "holomorphic family", name)?)
    }
    pub fn submanifold(&self, name: &str) -> Result<&ParamSubmanifold> {
        get(&self.submanifolds, "submanifold", name)
    }
    pub fn fibres(&self, name: &str) -> Result<&FibreFamily> {
        get(&self.fibres, "fibre family", name)
    }
    pub fn domain(&self, name: &str) -> Result<&SampleDomain> {
        get(&self.domains, "sample domain", name)
    }
    pub fn torus_map(&self, name: &str) -> Result<&MapExpr> {
        get(&self.torus_maps, "torus map", name)
    }

    /// Every catalogue expression with an interior sampling region, for the
    /// jet/finite-difference cross-check. Charts singular at the origin keep away from it.
    pub fn jet_check_targets(&self) -> Vec<(String, MapExpr, SampleDomain)> {
        let singular_at_origin = ["hopf-c2", "hopf-c3", "minus-lee-c2", "minus-2lee-c3"];
        let mut out = Vec::new();
        let mut push = |key: &str, e: &MapExpr| {
            let d = e.domain();
            let shrink: Vec<(f64, f64)> = (0..d.dim())
                .map(|i| {
                    let w = 0.1 * (d.hi[i] - d.lo[i]);
                    (d.lo[i] + w, d.hi[i] - w)
                })
                .collect();
            let mut dom = SampleDomain::new(DomainBox::new(
                shrink.iter().map(|s| s.0).collect(),
                shrink.iter().map(|s| s.1).collect(),
            ));
            if singular_at_origin.contains(&key) {
                dom = dom.excluding(Exclusion::NormBelow {
                    from: 0,
                    to: d.dim(),
                    radius: 0.5,
                });
            }
            out.push((key.to_string(), e.clone(), dom));
        };
        for (k, m) in &self.metrics {
            push(k, m.expr());
        }
        for (k, nm) in &self.maps {
            push(k, nm.riemannian.map());
        }
        for (k, f) in &self.fields {
            push(k, f.expr());
        }
        for (k, s) in &self.submanifolds {
            push(k, s.immersion());
        }
        for (k, m) in &self.torus_maps {
            push(k, m);
        }
        for (k, f) in &self.scalars {
            push(k, f.as_map());
        }
        out
    }
}

/// The compiled-in catalogue, built once.
pub fn catalogue() -> &'static Catalogue {
    static CAT: OnceLock<Catalogue> = OnceLock::new();
    CAT.get_or_init(|| build().expect("builtin catalogue is consistent"))
}

fn h(v: f64) -> Hyper {
    Hyper::lift(v)
}

fn norm2(x: &[Hyper]) -> Hyper {
    x.iter().fold(h(0.0), |s, v| s + *v * *v)
}

fn cmul(a: (Hyper, Hyper), b: (Hyper, Hyper)) -> (Hyper, Hyper) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv(a: (Hyper, Hyper), b: (Hyper, Hyper)) -> (Hyper, Hyper) {
    let den = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / den, (a.1 * b.0 - a.0 * b.1) / den)
}

fn bx(lo: &[f64], hi: &[f64]) -> DomainBox {
    DomainBox::new(lo.to_vec(), hi.to_vec())
}

fn sphere_metric() -> MetricField {
    MetricField::conformal("sphere-stereo", DomainBox::cube(2, -10.0, 10.0), |x| {
        let r2 = norm2(x) + 1.0;
        4.0 / (r2 * r2)
    })
}

fn hyperbolic_metric() -> MetricField {
    MetricField::conformal("hyperbolic", bx(&[-2.0, 0.3], &[2.0, 3.0]), |x| {
        (x[1] * x[1]).recip()
    })
}

/// `g⁻¹ = [[1, 0, a], [0, 1, b], [a, b, 1]]` with `a = −x/2`, `b = −y/2`; makes
/// `e^s(x + iy)` pseudo-horizontally weakly conformal.
fn twisted_metric() -> MetricField {
    MetricField::new("twisted-r3", DomainBox::cube(3, -1.0, 1.0), |x| {
        let a = x[0] * -0.5;
        let b = x[1] * -0.5;
        let det = 1.0 - a * a - b * b;
        let inv = det.recip();
        vec![
            (1.0 - b * b) * inv,
            a * b * inv,
            -a * inv,
            a * b * inv,
            (1.0 - a * a) * inv,
            -b * inv,
            -a * inv,
            -b * inv,
            inv,
        ]
    })
}

fn build() -> Result<Catalogue> {
    let mut c = Catalogue::default();

    // Metrics.
    let flat = |m: usize, r: f64| MetricField::flat(m, DomainBox::cube(m, -r, r));
    let sphere = sphere_metric();
    let hyper = hyperbolic_metric();
    let s2xs2 = MetricField::product("s2xs2", &sphere, &sphere);
    let s2xs2xh2 = MetricField::product("s2xs2xh2", &s2xs2, &hyper);
    let flat_c2 = flat(4, 10.0);
    let c2xh2 = MetricField::product("c2xh2", &flat_c2, &hyper);
    let hopf2 = hopf_structure(2, 3.0, 1.0);
    let hopf2_wrong = hopf_structure(2, 3.0, -1.0);
    let hopf3 = hopf_structure(3, 2.0, 1.0);
    let polar = MetricField::diagonal("polar", bx(&[0.3, -3.5], &[3.0, 3.5]), |x| {
        vec![h(1.0), x[0] * x[0]]
    });
    let twisted = twisted_metric();
    // Product of C² scaled by e^{2f(z)} with a line; f varies along the horizontal factor.
    let warped = MetricField::diagonal("warped-c2xr", DomainBox::cube(5, -2.0, 2.0), |x| {
        let e = ((x[0] * 0.4 + x[3] * 0.3) * 2.0).exp();
        vec![e, e, e, e, h(1.0)]
    });
    let metrics = [
        ("flat-r1", flat(1, 5.0)),
        ("flat-r2", flat(2, 3.0)),
        ("flat-r3", flat(3, 3.0)),
        ("flat-r4", flat(4, 3.0)),
        ("flat-c1-wide", flat(2, 50.0)),
        ("flat-c2-wide", flat(4, 50.0)),
        ("flat-r3-wide", flat(3, 200.0)),
        ("sphere-stereo", sphere.clone()),
        ("hyperbolic", hyper.clone()),
        ("s2xs2", s2xs2.clone()),
        ("s2xs2xh2", s2xs2xh2.clone()),
        ("c2xh2", c2xh2.clone()),
        ("hopf-c2", hopf2.complex().metric().clone()),
        ("hopf-c3", hopf3.complex().metric().clone()),
        ("polar", polar.clone()),
        ("twisted-r3", twisted.clone()),
        ("warped-c2xr", warped),
    ];
    for (k, v) in metrics {
        c.metrics.insert(k.into(), v);
    }

    // Complex and lcK structures.
    let std_cs = |m: &MetricField| ComplexStructureField::standard(m.clone());
    for name in [
        "flat-r2",
        "flat-r4",
        "flat-c1-wide",
        "flat-c2-wide",
        "sphere-stereo",
        "s2xs2",
        "hopf-c2",
        "hopf-c3",
    ] {
        let cs = std_cs(c.metric(name)?)?;
        c.complex.insert(name.into(), cs);
    }
    let zero_lee = MapExpr::new("lee0", DomainBox::cube(4, -3.0, 3.0), 4, |_| {
        vec![h(0.0); 4]
    });
    c.lck.insert(
        "flat-c2-kahler".into(),
        LckStructure::new(std_cs(c.metric("flat-r4")?)?, zero_lee)?,
    );
    c.lck.insert("hopf-c2".into(), hopf2.clone());
    c.lck.insert("hopf-c2-wrong-sign".into(), hopf2_wrong);
    c.lck.insert("hopf-c3".into(), hopf3.clone());

    // Vector fields.
    let fields = [
        ("minus-lee-c2".to_string(), hopf2.lee_field_expr(-1.0)),
        ("minus-2lee-c3".to_string(), hopf3.lee_field_expr(-2.0)),
        (
            "rotation-r3".to_string(),
            VectorFieldExpr::new("rotation-r3", DomainBox::cube(3, -3.0, 3.0), |x| {
                vec![-x[1], x[0], h(0.0)]
            }),
        ),
        (
            "rotation-lift-r3".to_string(),
            VectorFieldExpr::new("rotation-lift-r3", DomainBox::cube(3, -3.0, 3.0), |x| {
                vec![-x[1], x[0], h(0.3)]
            }),
        ),
        (
            "wavy-r2".to_string(),
            VectorFieldExpr::new("wavy-r2", DomainBox::cube(2, -3.0, 3.0), |x| {
                vec![x[1].sin(), x[0] * 0.5]
            }),
        ),
        (
            "vertical-s2xs2xh2".to_string(),
            VectorFieldExpr::new("vertical-s2xs2xh2", s2xs2xh2.domain().clone(), |x| {
                vec![
                    h(0.0),
                    h(0.0),
                    h(0.0),
                    h(0.0),
                    x[0].sin() + x[5],
                    x[4] * 0.3,
                ]
            }),
        ),
        (
            "horizontal-s2xs2xh2".to_string(),
            VectorFieldExpr::new("horizontal-s2xs2xh2", s2xs2xh2.domain().clone(), |x| {
                vec![x[4] * 0.1 + 0.5, h(0.0), h(0.0), h(0.0), h(0.0), h(0.0)]
            }),
        ),
        (
            "vertical-c2xh2".to_string(),
            VectorFieldExpr::new("vertical-c2xh2", c2xh2.domain().clone(), |x| {
                vec![
                    h(0.0),
                    h(0.0),
                    h(0.0),
                    h(0.0),
                    x[0].sin() + x[5],
                    x[4] * 0.3,
                ]
            }),
        ),
        (
            "torus-drift".to_string(),
            VectorFieldExpr::constant("torus-drift", crate::flow::torus_chart(), vec![0.3, -0.2]),
        ),
    ];
    for (k, v) in fields {
        c.fields.insert(k, v);
    }

    // Scalar functions on target charts.
    c.scalars.insert(
        "sphere-test-function".into(),
        ScalarExprField::new("sphere-test-function", DomainBox::cube(2, -4.0, 4.0), |w| {
            w[0] * w[0] - w[0] * w[1] + w[1].sin()
        }),
    );

    c.scalars.insert(
        "sphere-log-factor".into(),
        ScalarExprField::new("sphere-log-factor", sphere.domain().clone(), |w| {
            (2.0 / (norm2(w) + 1.0)).ln()
        }),
    );

    // Maps.
    let add_map = |c: &mut Catalogue,
                   name: &str,
                   src: &str,
                   tgt: &str,
                   dom: DomainBox,
                   n: usize,
                   f: Arc<MapFn>|
     -> Result<()> {
        let expr = MapExpr::new(name, dom, n, move |x| f(x));
        let riemannian =
            RiemannianMap::new(c.metric(src)?.clone(), c.metric(tgt)?.clone(), expr.clone())?;
        let hermitian = match c.complex.get(tgt) {
            Some(cs) => Some(HermitianTargetMap::new(
                c.metric(src)?.clone(),
                cs.clone(),
                expr,
            )?),
            None => None,
        };
        c.maps.insert(
            name.into(),
            NamedMap {
                riemannian,
                hermitian,
            },
        );
        Ok(())
    };
    let hopf_quot_box = bx(&[-1.0, -1.0, 0.5, -1.0], &[1.0, 1.0, 1.5, 1.0]);
    let r3_lower = bx(&[-1.0, -1.0, -1.5], &[1.0, 1.0, -0.5]);
    add_map(
        &mut c,
        "id-r2",
        "flat-r2",
        "flat-r2",
        DomainBox::cube(2, -1.0, 1.0),
        2,
        Arc::new(|x| x.to_vec()),
    )?;
    add_map(
        &mut c,
        "id-c2",
        "flat-r4",
        "flat-r4",
        DomainBox::cube(4, -1.0, 1.0),
        4,
        Arc::new(|x| x.to_vec()),
    )?;
    add_map(
        &mut c,
        "projection-r3-r2",
        "flat-r3",
        "flat-r2",
        DomainBox::cube(3, -1.0, 1.0),
        2,
        Arc::new(|x| x[..2].to_vec()),
    )?;
    add_map(
        &mut c,
        "projection-r4-r3",
        "flat-r4",
        "flat-r3",
        DomainBox::cube(4, -1.0, 1.0),
        3,
        Arc::new(|x| x[..3].to_vec()),
    )?;
    add_map(
        &mut c,
        "hopf-quotient",
        "hopf-c2",
        "sphere-stereo",
        hopf_quot_box.clone(),
        2,
        Arc::new(|x| {
            let (a, b) = cdiv((x[0], x[1]), (x[2], x[3]));
            vec![a, b]
        }),
    )?;
    add_map(
        &mut c,
        "hopf-z1-cp1",
        "hopf-c2",
        "sphere-stereo",
        hopf_quot_box.clone(),
        2,
        Arc::new(|x| vec![x[0], x[1]]),
    )?;
    add_map(
        &mut c,
        "hopf-z1-flat",
        "hopf-c2",
        "flat-c1-wide",
        hopf_quot_box.clone(),
        2,
        Arc::new(|x| vec![x[0], x[1]]),
    )?;
    add_map(
        &mut c,
        "sphere-square",
        "sphere-stereo",
        "sphere-stereo",
        DomainBox::cube(2, -3.0, 3.0),
        2,
        Arc::new(|w| {
            let (a, b) = cmul((w[0], w[1]), (w[0], w[1]));
            vec![a, b]
        }),
    )?;
    add_map(
        &mut c,
        "radial",
        "flat-r3",
        "sphere-stereo",
        r3_lower.clone(),
        2,
        Arc::new(|x| {
            let den = norm2(x).sqrt() - x[2];
            vec![x[0] / den, x[1] / den]
        }),
    )?;
    add_map(
        &mut c,
        "sphere-embedding",
        "sphere-stereo",
        "flat-r3-wide",
        DomainBox::cube(2, -10.0, 10.0),
        3,
        Arc::new(|w| {
            let r2 = norm2(w);
            let den = r2 + 1.0;
            vec![w[0] * 2.0 / den, w[1] * 2.0 / den, (r2 - 1.0) / den]
        }),
    )?;
    add_map(
        &mut c,
        "polar-radius",
        "polar",
        "flat-r1",
        bx(&[0.3, -3.5], &[3.0, 3.5]),
        1,
        Arc::new(|x| vec![x[0]]),
    )?;
    add_map(
        &mut c,
        "flat-pair-phi",
        "flat-r2",
        "flat-r2",
        DomainBox::cube(2, -1.0, 1.0),
        2,
        Arc::new(|x| {
            vec![
                x[0] * x[0] - x[1] + (x[0] * x[1]).sin(),
                x[0] + x[1] * x[1] * x[1] * 0.5,
            ]
        }),
    )?;
    add_map(
        &mut c,
        "flat-pair-psi",
        "flat-r2",
        "flat-r3-wide",
        DomainBox::cube(2, -3.0, 3.0),
        3,
        Arc::new(|y| vec![y[0].sin() + y[1] * y[1], y[0] * y[1], (y[0] * 0.3).exp()]),
    )?;
    add_map(
        &mut c,
        "product-projection-s2xs2",
        "s2xs2xh2",
        "s2xs2",
        s2xs2xh2.domain().clone(),
        4,
        Arc::new(|x| x[..4].to_vec()),
    )?;
    add_map(
        &mut c,
        "product-projection-c2",
        "c2xh2",
        "flat-c2-wide",
        c2xh2.domain().clone(),
        4,
        Arc::new(|x| x[..4].to_vec()),
    )?;
    add_map(
        &mut c,
        "x-plus-2iy",
        "flat-r2",
        "flat-c1-wide",
        DomainBox::cube(2, -1.0, 1.0),
        2,
        Arc::new(|x| vec![x[0], x[1] * 2.0]),
    )?;
    add_map(
        &mut c,
        "z-squared",
        "flat-r2",
        "flat-c1-wide",
        DomainBox::cube(2, -1.0, 1.0),
        2,
        Arc::new(|x| {
            let (a, b) = cmul((x[0], x[1]), (x[0], x[1]));
            vec![a, b]
        }),
    )?;
    add_map(
        &mut c,
        "exp-s-twisted",
        "twisted-r3",
        "flat-c1-wide",
        DomainBox::cube(3, -1.0, 1.0),
        2,
        Arc::new(|x| {
            let e = x[2].exp();
            vec![e * x[0], e * x[1]]
        }),
    )?;
    add_map(
        &mut c,
        "exp-s-flat",
        "flat-r3",
        "flat-c1-wide",
        DomainBox::cube(3, -1.0, 1.0),
        2,
        Arc::new(|x| {
            let e = x[2].exp();
            vec![e * x[0], e * x[1]]
        }),
    )?;
    add_map(
        &mut c,
        "warped-projection",
        "warped-c2xr",
        "flat-c2-wide",
        DomainBox::cube(5, -1.5, 1.5),
        4,
        Arc::new(|x| x[..4].to_vec()),
    )?;
    add_map(
        &mut c,
        "hopf-identity-c2",
        "hopf-c2",
        "flat-c2-wide",
        DomainBox::cube(4, -1.5, 1.5),
        4,
        Arc::new(|x| x.to_vec()),
    )?;
    let hopf3_box = DomainBox::cube(6, -1.5, 1.5);
    add_map(
        &mut c,
        "hopf3-projection",
        "hopf-c3",
        "flat-c2-wide",
        hopf3_box.clone(),
        4,
        Arc::new(|x| x[..4].to_vec()),
    )?;
    add_map(
        &mut c,
        "hopf3-non-phwc",
        "hopf-c3",
        "flat-c2-wide",
        hopf3_box.clone(),
        4,
        Arc::new(|x| vec![x[0], x[1] * 2.0, x[2], x[3]]),
    )?;
    add_map(
        &mut c,
        "hopf3-composite",
        "hopf-c3",
        "flat-c2-wide",
        hopf3_box,
        4,
        Arc::new(|x| {
            let (a, b) = cmul((x[0], x[1]), (x[2], x[3]));
            vec![x[0], x[1], a, b]
        }),
    )?;
    add_map(
        &mut c,
        "c2-holomorphic-phm",
        "flat-c2-wide",
        "flat-c2-wide",
        DomainBox::cube(4, -3.0, 3.0),
        4,
        Arc::new(|w| {
            let (a, b) = cmul((w[0], w[1]), (w[2], w[3]));
            vec![w[0], w[1], a, b]
        }),
    )?;

    // Holomorphic test families on target charts.
    c.holomorphic.insert(
        "battery-c1".into(),
        holomorphic_battery(&DomainBox::cube(2, -50.0, 50.0)),
    );
    c.holomorphic.insert(
        "battery-c2".into(),
        holomorphic_battery(&DomainBox::cube(4, -50.0, 50.0)),
    );
    c.holomorphic.insert(
        "battery-sphere".into(),
        holomorphic_battery(sphere.domain()),
    );

    // Submanifolds.
    let hopf_metric = c.metric("hopf-c2")?.clone();
    let subs = [
        (
            "hopf-line-z2-eq-1",
            ParamSubmanifold::new(
                hopf_metric.clone(),
                MapExpr::new("hopf-line-z2-eq-1", DomainBox::cube(2, -1.5, 1.5), 4, |u| {
                    vec![u[0], u[1], h(1.0), h(0.0)]
                }),
            )?,
        ),
        (
            "hopf-line-radial",
            ParamSubmanifold::new(
                hopf_metric.clone(),
                MapExpr::new("hopf-line-radial", bx(&[0.3, -1.0], &[1.2, 1.0]), 4, |u| {
                    let (a, b) = cmul((u[0], u[1]), (h(0.5), h(0.3)));
                    vec![u[0], u[1], a, b]
                }),
            )?,
        ),
        (
            "hopf-totally-real",
            ParamSubmanifold::new(
                hopf_metric,
                MapExpr::new("hopf-totally-real", bx(&[0.3, 0.3], &[1.5, 1.5]), 4, |u| {
                    vec![u[0], h(0.0), u[1], h(0.0)]
                }),
            )?,
        ),
        (
            "flat-plane",
            ParamSubmanifold::new(
                c.metric("flat-r3")?.clone(),
                MapExpr::new("flat-plane", DomainBox::cube(2, -1.0, 1.0), 3, |u| {
                    vec![u[0] + u[1], u[0] - u[1] * 2.0, u[1] * 0.5 + 1.0]
                }),
            )?,
        ),
        (
            "unit-circle",
            ParamSubmanifold::new(
                c.metric("flat-r2")?.clone(),
                MapExpr::new("unit-circle", DomainBox::cube(1, -4.0, 4.0), 2, |t| {
                    vec![t[0].cos(), t[0].sin()]
                }),
            )?,
        ),
        (
            "sphere-equator",
            ParamSubmanifold::new(
                sphere.clone(),
                MapExpr::new("sphere-equator", DomainBox::cube(1, -4.0, 4.0), 2, |t| {
                    vec![t[0].cos(), t[0].sin()]
                }),
            )?,
        ),
        (
            "diagonal-times-h2",
            ParamSubmanifold::new(
                s2xs2xh2.clone(),
                MapExpr::new(
                    "diagonal-times-h2",
                    bx(&[-2.0, -2.0, -1.5, 0.5], &[2.0, 2.0, 1.5, 2.5]),
                    6,
                    |u| vec![u[0], u[1], u[0], u[1], u[2], u[3]],
                ),
            )?,
        ),
        (
            "parabola-times-h2",
            ParamSubmanifold::new(
                c2xh2.clone(),
                MapExpr::new(
                    "parabola-times-h2",
                    bx(&[-1.5, -1.5, -1.5, 0.5], &[1.5, 1.5, 1.5, 2.5]),
                    6,
                    |u| {
                        let (a, b) = cmul((u[0], u[1]), (u[0], u[1]));
                        vec![u[0], u[1], a, b, u[2], u[3]]
                    },
                ),
            )?,
        ),
    ];
    for (k, v) in subs {
        c.submanifolds.insert(k.into(), v);
    }

    // Fibre families.
    let hyp_box = hyper.domain().clone();
    let s6 = s2xs2xh2.clone();
    c.fibres.insert(
        "product-fibres-s2xs2xh2".into(),
        FibreFamily(Arc::new(move |p: &[f64]| {
            let base: Vec<f64> = p[..4].to_vec();
            let imm = MapExpr::new("fibre", hyp_box.clone(), 6, move |s| {
                let mut v: Vec<Hyper> = base.iter().map(|b| h(*b)).collect();
                v.extend_from_slice(s);
                v
            });
            Ok((ParamSubmanifold::new(s6.clone(), imm)?, p[4..].to_vec()))
        })),
    );
    let r3 = c.metric("flat-r3")?.clone();
    c.fibres.insert(
        "radial-rays".into(),
        FibreFamily(Arc::new(move |p: &[f64]| {
            let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dir: Vec<f64> = p.iter().map(|v| v / r).collect();
            let imm = MapExpr::new("ray", bx(&[0.9 * r], &[1.1 * r]), 3, move |t| {
                dir.iter().map(|d| t[0] * *d).collect()
            });
            Ok((ParamSubmanifold::new(r3.clone(), imm)?, vec![r]))
        })),
    );
    let polar_m = polar.clone();
    c.fibres.insert(
        "polar-circles".into(),
        FibreFamily(Arc::new(move |p: &[f64]| {
            let r0 = p[0];
            let imm = MapExpr::new("circle", bx(&[p[1] - 0.4], &[p[1] + 0.4]), 2, move |t| {
                vec![h(r0), t[0]]
            });
            Ok((ParamSubmanifold::new(polar_m.clone(), imm)?, vec![p[1]]))
        })),
    );
    let hopf_m = c.metric("hopf-c2")?.clone();
    c.fibres.insert(
        "hopf-orbits".into(),
        FibreFamily(Arc::new(move |p: &[f64]| {
            let z = p.to_vec();
            let imm = MapExpr::new("orbit", bx(&[0.8, -0.2], &[1.2, 0.2]), 4, move |l| {
                let (a, b) = cmul((l[0], l[1]), (h(z[0]), h(z[1])));
                let (c2, d) = cmul((l[0], l[1]), (h(z[2]), h(z[3])));
                vec![a, b, c2, d]
            });
            Ok((ParamSubmanifold::new(hopf_m.clone(), imm)?, vec![1.0, 0.0]))
        })),
    );

    // Sampling domains.
    let norm_below = |from, to, radius| Exclusion::NormBelow { from, to, radius };
    let domains = [
        (
            "unit-square",
            SampleDomain::new(DomainBox::cube(2, -1.0, 1.0)),
        ),
        (
            "unit-cube-r3",
            SampleDomain::new(DomainBox::cube(3, -1.0, 1.0)),
        ),
        (
            "unit-cube-r4",
            SampleDomain::new(DomainBox::cube(4, -1.0, 1.0)),
        ),
        (
            "sphere-chart",
            SampleDomain::new(DomainBox::cube(2, -3.0, 3.0)),
        ),
        (
            "flat-r2-box",
            SampleDomain::new(DomainBox::cube(2, -2.5, 2.5)),
        ),
        (
            "flat-r3-box",
            SampleDomain::new(DomainBox::cube(3, -2.5, 2.5)),
        ),
        (
            "hopf-c2-shell",
            SampleDomain::new(DomainBox::cube(4, -1.5, 1.5)).excluding(norm_below(0, 4, 0.25)),
        ),
        (
            "hopf-c3-shell",
            SampleDomain::new(DomainBox::cube(6, -1.5, 1.5)).excluding(norm_below(0, 6, 0.25)),
        ),
        ("hopf-quotient-box", SampleDomain::new(hopf_quot_box)),
        ("r3-lower", SampleDomain::new(r3_lower)),
        (
            "polar-annulus",
            SampleDomain::new(bx(&[0.5, -3.0], &[2.0, 3.0])),
        ),
        (
            "s2xs2xh2-box",
            SampleDomain::new(bx(
                &[-2.0, -2.0, -2.0, -2.0, -1.5, 0.5],
                &[2.0, 2.0, 2.0, 2.0, 1.5, 2.5],
            )),
        ),
        (
            "c2xh2-box",
            SampleDomain::new(bx(
                &[-2.0, -2.0, -2.0, -2.0, -1.5, 0.5],
                &[2.0, 2.0, 2.0, 2.0, 1.5, 2.5],
            )),
        ),
        (
            "s2xs2-box",
            SampleDomain::new(DomainBox::cube(4, -2.0, 2.0)),
        ),
        (
            "hyperbolic-box",
            SampleDomain::new(bx(&[-1.5, 0.5], &[1.5, 2.5])),
        ),
        (
            "hopf-line-params",
            SampleDomain::new(DomainBox::cube(2, -1.5, 1.5)),
        ),
        (
            "hopf-radial-line-params",
            SampleDomain::new(bx(&[0.3, -1.0], &[1.2, 1.0])),
        ),
        (
            "totally-real-params",
            SampleDomain::new(bx(&[0.3, 0.3], &[1.5, 1.5])),
        ),
        (
            "circle-params",
            SampleDomain::new(DomainBox::cube(1, -3.0, 3.0)),
        ),
        (
            "product-params",
            SampleDomain::new(bx(&[-2.0, -2.0, -1.5, 0.5], &[2.0, 2.0, 1.5, 2.5])),
        ),
        (
            "parabola-params",
            SampleDomain::new(bx(&[-1.5, -1.5, -1.5, 0.5], &[1.5, 1.5, 1.5, 2.5])),
        ),
        (
            "warped-box",
            SampleDomain::new(DomainBox::cube(5, -1.0, 1.0)),
        ),
        (
            "twisted-box",
            SampleDomain::new(DomainBox::cube(3, -0.9, 0.9)),
        ),
        ("torus", SampleDomain::new(DomainBox::cube(2, 0.0, 1.0))),
    ];
    for (k, v) in domains {
        c.domains.insert(k.into(), v);
    }

    // Periodic maps from the torus chart into the sphere chart.
    c.torus_maps.insert(
        "torus-wave".into(),
        MapExpr::new("torus-wave", crate::flow::torus_chart(), 2, |x| {
            let (a, b) = (x[0] * (2.0 * PI), x[1] * (2.0 * PI));
            vec![a.cos() * 0.5 + b.sin() * 0.2, a.sin() * b.cos() * 0.4 + 0.1]
        }),
    );
    Ok(c)
}
