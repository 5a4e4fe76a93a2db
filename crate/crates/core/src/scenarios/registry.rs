use std::path::Path;
use std::sync::OnceLock;

use super::definition::{
    CheckSpec, Expectation, FlowSpec, InitialData, LckQuantity, Operation, Sampler, ScenarioSpec,
    TripleComponent, TOLERANCES,
};
use crate::error::{Error, Result};

const DEFAULT_SAMPLER: Sampler = Sampler {
    points: 100,
    seed: 42,
};

fn below(tol: f64) -> Expectation {
    Expectation::Below { tol }
}

fn structural() -> Expectation {
    below(TOLERANCES.structural)
}

/// Residuals on flat charts are exact up to rounding.
fn exact() -> Expectation {
    below(1e-10)
}

fn theorem() -> Expectation {
    below(TOLERANCES.theorem)
}

fn control() -> Expectation {
    Expectation::Above {
        floor: TOLERANCES.negative_floor,
    }
}

fn check(label: &str, operation: Operation, expect: Expectation, domain: &str) -> CheckSpec {
    CheckSpec {
        label: label.into(),
        operation,
        expect,
        domain: Some(domain.into()),
        allow_rank_loss: false,
    }
}

fn global(label: &str, operation: Operation, expect: Expectation) -> CheckSpec {
    CheckSpec {
        label: label.into(),
        operation,
        expect,
        domain: None,
        allow_rank_loss: false,
    }
}

fn s(x: &str) -> String {
    x.to_string()
}

fn some(x: &str) -> Option<String> {
    Some(x.to_string())
}

fn scenario(
    name: &str,
    title: &str,
    claim: &str,
    sampler: Sampler,
    checks: Vec<CheckSpec>,
) -> ScenarioSpec {
    ScenarioSpec {
        name: name.into(),
        title: title.into(),
        claim: claim.into(),
        sampler,
        checks,
    }
}

fn triple(map: &str, field: Option<String>, c: TripleComponent) -> Operation {
    Operation::TwoImplyThird {
        map: s(map),
        field,
        component: c,
    }
}

fn s1() -> ScenarioSpec {
    use TripleComponent::*;
    scenario(
        "S1",
        "flat-identity",
        "On flat charts every residual operation vanishes for identities, projections and affine planes.",
        DEFAULT_SAMPLER,
        vec![
            check("tension of identity", Operation::Tension { map: s("id-r2") }, exact(), "unit-square"),
            check(
                "V-tension of identity",
                Operation::VTension {
                    map: s("id-r2"),
                    field: None,
                },
                exact(),
                "unit-square",
            ),
            check(
                "composition identity",
                Operation::Composition {
                    phi: s("id-r2"),
                    psi: s("id-r2"),
                    field: None,
                },
                exact(),
                "unit-square",
            ),
            check(
                "metric compatibility",
                Operation::MetricCompatibility { metric: s("flat-r3") },
                exact(),
                "flat-r3-box",
            ),
            check(
                "Christoffel symmetry",
                Operation::ChristoffelSymmetry { metric: s("flat-r3") },
                exact(),
                "flat-r3-box",
            ),
            check(
                "Kähler defect",
                Operation::KahlerDefect { structure: s("flat-r4") },
                exact(),
                "unit-cube-r4",
            ),
            check(
                "lcK defect with zero Lee form",
                Operation::LckDefect { lck: s("flat-c2-kahler") },
                exact(),
                "unit-cube-r4",
            ),
            check("PHWC of identity", Operation::Phwc { map: s("id-c2") }, exact(), "unit-cube-r4"),
            check("PHH of identity", Operation::Phh { map: s("id-c2") }, exact(), "unit-cube-r4"),
            check(
                "fibre mean curvature of projection",
                Operation::FibreMeanCurvature {
                    map: s("projection-r3-r2"),
                },
                exact(),
                "unit-cube-r3",
            ),
            check(
                "minimality of affine plane",
                Operation::VMinimality {
                    submanifold: s("flat-plane"),
                    field: None,
                },
                exact(),
                "unit-square",
            ),
            check("projection R1", triple("projection-r4-r3", None, R1), exact(), "unit-cube-r4"),
            check("projection R2", triple("projection-r4-r3", None, R2), exact(), "unit-cube-r4"),
            check("projection R3", triple("projection-r4-r3", None, R3), exact(), "unit-cube-r4"),
        ],
    )
}

fn s2() -> ScenarioSpec {
    let compat = |m: &str, d: &str| {
        check(
            &format!("metric compatibility on {m}"),
            Operation::MetricCompatibility { metric: s(m) },
            structural(),
            d,
        )
    };
    scenario(
        "S2",
        "sphere-christoffel",
        "Christoffel symbols of conformal, product and warped charts match closed forms and are metric compatible; jets agree with finite differences.",
        DEFAULT_SAMPLER,
        vec![
            check(
                "sphere Christoffel against conformal closed form",
                Operation::ChristoffelConformal {
                    metric: s("sphere-stereo"),
                    log_factor: s("sphere-log-factor"),
                },
                structural(),
                "sphere-chart",
            ),
            compat("sphere-stereo", "sphere-chart"),
            compat("s2xs2xh2", "s2xs2xh2-box"),
            compat("hopf-c2", "hopf-c2-shell"),
            compat("polar", "polar-annulus"),
            compat("twisted-r3", "twisted-box"),
            check(
                "Christoffel symmetry on twisted chart",
                Operation::ChristoffelSymmetry {
                    metric: s("twisted-r3"),
                },
                structural(),
                "twisted-box",
            ),
            check(
                "sphere is Kähler",
                Operation::KahlerDefect {
                    structure: s("sphere-stereo"),
                },
                structural(),
                "sphere-chart",
            ),
            check(
                "S2 x S2 is Kähler",
                Operation::KahlerDefect { structure: s("s2xs2") },
                structural(),
                "s2xs2-box",
            ),
            global("jets against finite differences", Operation::JetConsistency, theorem()),
        ],
    )
}

fn s3() -> ScenarioSpec {
    scenario(
        "S3",
        "hopf-lck",
        "The Hopf chart metric with Lee form −2x/|z|² satisfies dΩ = ω∧Ω with ω closed; it is not Kähler.",
        DEFAULT_SAMPLER,
        vec![
            check(
                "lcK defect, complex dimension 2",
                Operation::LckDefect { lck: s("hopf-c2") },
                structural(),
                "hopf-c2-shell",
            ),
            check(
                "lcK defect, complex dimension 3",
                Operation::LckDefect { lck: s("hopf-c3") },
                structural(),
                "hopf-c3-shell",
            ),
            check(
                "Lee form closed, complex dimension 2",
                Operation::LeeClosedness { lck: s("hopf-c2") },
                structural(),
                "hopf-c2-shell",
            ),
            check(
                "Lee form closed, complex dimension 3",
                Operation::LeeClosedness { lck: s("hopf-c3") },
                structural(),
                "hopf-c3-shell",
            ),
            check(
                "J is orthogonal and squares to −1",
                Operation::StructureDefect {
                    structure: s("hopf-c2"),
                },
                structural(),
                "hopf-c2-shell",
            ),
            check(
                "Hopf chart is not Kähler",
                Operation::KahlerDefect {
                    structure: s("hopf-c2"),
                },
                control(),
                "hopf-c2-shell",
            ),
            check(
                "wrong-sign Lee form breaks the lcK identity",
                Operation::LckDefect {
                    lck: s("hopf-c2-wrong-sign"),
                },
                control(),
                "hopf-c2-shell",
            ),
        ],
    )
}

fn s4() -> ScenarioSpec {
    let lck = |label: &str, sub: &str, q: LckQuantity, e: Expectation, d: &str| {
        check(
            label,
            Operation::LckSubmanifold {
                submanifold: s(sub),
                lck: s("hopf-c2"),
                quantity: q,
            },
            e,
            d,
        )
    };
    scenario(
        "S4",
        "hopf-complex-line",
        "A complex submanifold of complex dimension n in an lcK chart has trace A = −n B^⊥ and is (−nB)-minimal.",
        Sampler { points: 200, seed: 42 },
        vec![
            lck("line z2 = 1: trace A + B^⊥", "hopf-line-z2-eq-1", LckQuantity::R1, theorem(), "hopf-line-params"),
            lck("line z2 = 1: (−B)-minimality", "hopf-line-z2-eq-1", LckQuantity::R2, theorem(), "hopf-line-params"),
            lck("line z2 = 1 is not minimal", "hopf-line-z2-eq-1", LckQuantity::TraceNorm, control(), "hopf-line-params"),
            check(
                "line z2 = 1 is J-invariant",
                Operation::JInvariance {
                    submanifold: s("hopf-line-z2-eq-1"),
                    lck: s("hopf-c2"),
                },
                structural(),
                "hopf-line-params",
            ),
            lck("radial line: trace A + B^⊥", "hopf-line-radial", LckQuantity::R1, theorem(), "hopf-radial-line-params"),
            lck("radial line: (−B)-minimality", "hopf-line-radial", LckQuantity::R2, theorem(), "hopf-radial-line-params"),
            lck("radial line is minimal", "hopf-line-radial", LckQuantity::TraceNorm, theorem(), "hopf-radial-line-params"),
            lck("radial line contains B", "hopf-line-radial", LckQuantity::LeeNormalNorm, theorem(), "hopf-radial-line-params"),
            check(
                "totally real plane is not J-invariant",
                Operation::JInvariance {
                    submanifold: s("hopf-totally-real"),
                    lck: s("hopf-c2"),
                },
                control(),
                "totally-real-params",
            ),
        ],
    )
}

fn s5() -> ScenarioSpec {
    let minus_b = some("minus-lee-c2");
    scenario(
        "S5",
        "hopf-quotient",
        "Holomorphic maps from the Hopf chart onto a Kähler chart are V-harmonic for V = (1 − m)B; here m = 2.",
        DEFAULT_SAMPLER,
        vec![
            check(
                "z1/z2 is (−B)-harmonic",
                Operation::VTension {
                    map: s("hopf-quotient"),
                    field: minus_b.clone(),
                },
                theorem(),
                "hopf-quotient-box",
            ),
            check("z1/z2 is PHWC", Operation::Phwc { map: s("hopf-quotient") }, structural(), "hopf-quotient-box"),
            check(
                "z1/z2 is horizontally conformal",
                Operation::HwcDeviation {
                    map: s("hopf-quotient"),
                },
                structural(),
                "hopf-quotient-box",
            ),
            check(
                "dilation identity with V = −B",
                Operation::DilationIdentity {
                    map: s("hopf-quotient"),
                    field: minus_b.clone(),
                    function: s("sphere-test-function"),
                },
                theorem(),
                "hopf-quotient-box",
            ),
            check(
                "holomorphic pullbacks are (−B)-harmonic",
                Operation::HolomorphicPullback {
                    map: s("hopf-quotient"),
                    field: minus_b.clone(),
                    family: s("battery-sphere"),
                    member: None,
                },
                theorem(),
                "hopf-quotient-box",
            ),
            check(
                "C* orbits are (−B)-minimal",
                Operation::FibreVMinimality {
                    fibres: s("hopf-orbits"),
                    field: minus_b.clone(),
                },
                theorem(),
                "hopf-quotient-box",
            ),
            check(
                "z1/z2 is not harmonic without drift",
                Operation::Tension {
                    map: s("hopf-quotient"),
                },
                Expectation::AboveAtFraction {
                    floor: TOLERANCES.negative_floor,
                    fraction: 0.9,
                },
                "hopf-quotient-box",
            ),
            check(
                "z1 is (−B)-harmonic",
                Operation::VTension {
                    map: s("hopf-z1-cp1"),
                    field: minus_b,
                },
                theorem(),
                "hopf-quotient-box",
            ),
            check(
                "z1 is not harmonic without drift",
                Operation::Tension { map: s("hopf-z1-cp1") },
                Expectation::AboveAtFraction {
                    floor: TOLERANCES.negative_floor,
                    fraction: 0.9,
                },
                "hopf-quotient-box",
            ),
        ],
    )
}

fn s6() -> ScenarioSpec {
    use TripleComponent::*;
    let rot = some("rotation-r3");
    scenario(
        "S6",
        "radial-projection",
        "For a horizontally weakly conformal map any two of V-harmonicity, the horizontal gradient condition and fibre V-minimality imply the third.",
        DEFAULT_SAMPLER,
        vec![
            check("V = 0: R1", triple("radial", None, R1), theorem(), "r3-lower"),
            check("V = 0: R2", triple("radial", None, R2), theorem(), "r3-lower"),
            check("V = 0: R3", triple("radial", None, R3), theorem(), "r3-lower"),
            check("horizontal V: R3 still vanishes", triple("radial", rot.clone(), R3), theorem(), "r3-lower"),
            check("horizontal V: R1 fails", triple("radial", rot.clone(), R1), control(), "r3-lower"),
            check("horizontal V: R2 fails", triple("radial", rot.clone(), R2), control(), "r3-lower"),
            check(
                "horizontal V: τ_V − dφ(V) vanishes",
                Operation::VTensionMinusDrift {
                    map: s("radial"),
                    field: s("rotation-r3"),
                },
                structural(),
                "r3-lower",
            ),
            check("radial projection is HWC", Operation::HwcDeviation { map: s("radial") }, structural(), "r3-lower"),
            check(
                "dilation identity",
                Operation::DilationIdentity {
                    map: s("radial"),
                    field: None,
                    function: s("sphere-test-function"),
                },
                theorem(),
                "r3-lower",
            ),
            check(
                "rays are minimal",
                Operation::FibreVMinimality {
                    fibres: s("radial-rays"),
                    field: None,
                },
                theorem(),
                "r3-lower",
            ),
            check(
                "fibre curvature routes agree on rays",
                Operation::FibreCurvatureRoutes {
                    map: s("radial"),
                    fibres: s("radial-rays"),
                },
                structural(),
                "r3-lower",
            ),
            check(
                "fibre curvature routes agree on polar circles",
                Operation::FibreCurvatureRoutes {
                    map: s("polar-radius"),
                    fibres: s("polar-circles"),
                },
                structural(),
                "polar-annulus",
            ),
            check(
                "polar circles are not minimal",
                Operation::FibreMeanCurvature {
                    map: s("polar-radius"),
                },
                control(),
                "polar-annulus",
            ),
        ],
    )
}

fn s7() -> ScenarioSpec {
    let map = || s("product-projection-s2xs2");
    let d = "s2xs2xh2-box";
    let fib = |f: &str| Operation::FibreVMinimality {
        fibres: s("product-fibres-s2xs2xh2"),
        field: some(f),
    };
    scenario(
        "S7",
        "phh-product",
        "For a PHH submersion onto a Kähler chart of complex dimension at least 2, V-harmonicity and V-minimality of the fibres coincide.",
        DEFAULT_SAMPLER,
        vec![
            check(
                "vertical V: V-harmonic",
                Operation::VTension {
                    map: map(),
                    field: some("vertical-s2xs2xh2"),
                },
                structural(),
                d,
            ),
            check("vertical V: fibres V-minimal", fib("vertical-s2xs2xh2"), structural(), d),
            check(
                "horizontal V: not V-harmonic",
                Operation::VTension {
                    map: map(),
                    field: some("horizontal-s2xs2xh2"),
                },
                control(),
                d,
            ),
            check("horizontal V: fibres not V-minimal", fib("horizontal-s2xs2xh2"), control(), d),
            check("PHWC", Operation::Phwc { map: map() }, structural(), d),
            check("PHWC commutator form", Operation::PhwcCommutator { map: map() }, structural(), d),
            check("PHH", Operation::Phh { map: map() }, structural(), d),
            check("PHH frame identity", Operation::PhhFrameIdentity { map: map() }, structural(), d),
            check("τ = −dφ(fibre mean curvature)", Operation::PhhTensionIdentity { map: map() }, structural(), d),
            check(
                "fibre curvature routes agree",
                Operation::FibreCurvatureRoutes {
                    map: map(),
                    fibres: s("product-fibres-s2xs2xh2"),
                },
                structural(),
                d,
            ),
            check(
                "target is Kähler",
                Operation::KahlerDefect { structure: s("s2xs2") },
                structural(),
                "s2xs2-box",
            ),
        ],
    )
}

fn s8() -> ScenarioSpec {
    scenario(
        "S8",
        "preimage-minimal",
        "Preimages of complex submanifolds under a V-harmonic PHH submersion with vertical V are V-minimal.",
        DEFAULT_SAMPLER,
        vec![
            check(
                "diagonal × H² is V-minimal",
                Operation::VMinimality {
                    submanifold: s("diagonal-times-h2"),
                    field: some("vertical-s2xs2xh2"),
                },
                theorem(),
                "product-params",
            ),
            check(
                "parabola × H² is V-minimal",
                Operation::VMinimality {
                    submanifold: s("parabola-times-h2"),
                    field: some("vertical-c2xh2"),
                },
                theorem(),
                "parabola-params",
            ),
            check(
                "V-minimality routes agree",
                Operation::VMinimalityRoutes {
                    submanifold: s("parabola-times-h2"),
                    field: some("vertical-c2xh2"),
                },
                theorem(),
                "parabola-params",
            ),
            check(
                "flat projection is V-harmonic",
                Operation::VTension {
                    map: s("product-projection-c2"),
                    field: some("vertical-c2xh2"),
                },
                structural(),
                "c2xh2-box",
            ),
            check(
                "flat projection is PHH",
                Operation::Phh {
                    map: s("product-projection-c2"),
                },
                structural(),
                "c2xh2-box",
            ),
            check(
                "horizontal V breaks V-minimality",
                Operation::VMinimality {
                    submanifold: s("diagonal-times-h2"),
                    field: some("horizontal-s2xs2xh2"),
                },
                control(),
                "product-params",
            ),
        ],
    )
}

fn s9() -> ScenarioSpec {
    let comp = |label: &str, phi: &str, psi: &str, f: &str, d: &str| {
        check(
            label,
            Operation::Composition {
                phi: s(phi),
                psi: s(psi),
                field: some(f),
            },
            structural(),
            d,
        )
    };
    scenario(
        "S9",
        "composition",
        "τ_V(ψ∘φ) = dψ(τ_V(φ)) + trace ∇dψ(dφ, dφ).",
        DEFAULT_SAMPLER,
        vec![
            comp(
                "flat pair",
                "flat-pair-phi",
                "flat-pair-psi",
                "wavy-r2",
                "unit-square",
            ),
            comp(
                "radial projection then sphere embedding",
                "radial",
                "sphere-embedding",
                "rotation-lift-r3",
                "r3-lower",
            ),
            comp(
                "Hopf quotient then squaring",
                "hopf-quotient",
                "sphere-square",
                "minus-lee-c2",
                "hopf-quotient-box",
            ),
        ],
    )
}

fn s10() -> ScenarioSpec {
    let v = some("minus-2lee-c3");
    let d = "hopf-c3-shell";
    let battery = |map: &str| Operation::HolomorphicPullback {
        map: s(map),
        field: v.clone(),
        family: s("battery-c2"),
        member: None,
    };
    scenario(
        "S10",
        "v-phm-battery",
        "A V-pseudo-harmonic morphism pulls holomorphic functions back to V-harmonic ones.",
        DEFAULT_SAMPLER,
        vec![
            check(
                "projection is (−2B)-harmonic",
                Operation::VTension {
                    map: s("hopf3-projection"),
                    field: v.clone(),
                },
                theorem(),
                d,
            ),
            check(
                "projection is PHWC",
                Operation::Phwc {
                    map: s("hopf3-projection"),
                },
                structural(),
                d,
            ),
            check(
                "battery on projection",
                battery("hopf3-projection"),
                theorem(),
                d,
            ),
            check(
                "battery on composite",
                battery("hopf3-composite"),
                theorem(),
                d,
            ),
            check(
                "holomorphic map of C² is PHWC",
                Operation::Phwc {
                    map: s("c2-holomorphic-phm"),
                },
                structural(),
                "unit-cube-r4",
            ),
            check(
                "non-PHWC map is detected",
                Operation::Phwc {
                    map: s("hopf3-non-phwc"),
                },
                control(),
                d,
            ),
            check(
                "battery fails on non-PHWC map",
                battery("hopf3-non-phwc"),
                control(),
                d,
            ),
        ],
    )
}

fn s11() -> ScenarioSpec {
    scenario(
        "S11",
        "negative-controls",
        "Maps and structures that violate a hypothesis are detected.",
        DEFAULT_SAMPLER,
        vec![
            check(
                "x + 2iy is not PHWC",
                Operation::Phwc {
                    map: s("x-plus-2iy"),
                },
                control(),
                "unit-square",
            ),
            check(
                "x + 2iy commutator form",
                Operation::PhwcCommutator {
                    map: s("x-plus-2iy"),
                },
                control(),
                "unit-square",
            ),
            check(
                "z² is PHWC",
                Operation::Phwc {
                    map: s("z-squared"),
                },
                structural(),
                "unit-square",
            ),
            check(
                "z² is PHH",
                Operation::Phh {
                    map: s("z-squared"),
                },
                structural(),
                "unit-square",
            ),
            check(
                "e^s(x + iy) is PHWC on the twisted chart",
                Operation::Phwc {
                    map: s("exp-s-twisted"),
                },
                structural(),
                "twisted-box",
            ),
            check(
                "e^s(x + iy) is PHH: one complex target dimension",
                Operation::PhhRaw {
                    map: s("exp-s-twisted"),
                },
                structural(),
                "twisted-box",
            ),
            check(
                "e^s(x + iy) is not PHWC on flat R³",
                Operation::Phwc {
                    map: s("exp-s-flat"),
                },
                control(),
                "unit-cube-r3",
            ),
            check(
                "z1 on the Hopf chart is PHWC",
                Operation::Phwc {
                    map: s("hopf-z1-flat"),
                },
                structural(),
                "hopf-quotient-box",
            ),
            check(
                "z1 on the Hopf chart is PHH: one complex target dimension",
                Operation::PhhRaw {
                    map: s("hopf-z1-flat"),
                },
                structural(),
                "hopf-quotient-box",
            ),
            check(
                "warped projection is PHWC",
                Operation::Phwc {
                    map: s("warped-projection"),
                },
                structural(),
                "warped-box",
            ),
            check(
                "warped projection is not PHH",
                Operation::Phh {
                    map: s("warped-projection"),
                },
                control(),
                "warped-box",
            ),
            check(
                "warped projection breaks the PHH frame identity",
                Operation::PhhFrameIdentity {
                    map: s("warped-projection"),
                },
                control(),
                "warped-box",
            ),
            check(
                "Hopf chart onto flat C² is PHWC",
                Operation::Phwc {
                    map: s("hopf-identity-c2"),
                },
                structural(),
                "hopf-c2-shell",
            ),
            check(
                "Hopf chart onto flat C² is not PHH",
                Operation::Phh {
                    map: s("hopf-identity-c2"),
                },
                control(),
                "hopf-c2-shell",
            ),
            check(
                "wrong-sign Lee form",
                Operation::LckDefect {
                    lck: s("hopf-c2-wrong-sign"),
                },
                control(),
                "hopf-c2-shell",
            ),
            check(
                "Hopf chart is not Kähler",
                Operation::KahlerDefect {
                    structure: s("hopf-c2"),
                },
                control(),
                "hopf-c2-shell",
            ),
        ],
    )
}

fn sphere_flow(drift: Option<String>) -> FlowSpec {
    FlowSpec {
        grid: [32, 32],
        target: s("sphere-stereo"),
        initial: InitialData::Perturbed {
            base: vec![0.3, -0.2],
            amplitude: 0.05,
        },
        step: None,
        max_iters: 10_000,
        tol: TOLERANCES.flow,
        drift,
        record_every: 1,
    }
}

fn s12() -> ScenarioSpec {
    let plain = sphere_flow(None);
    scenario(
        "S12",
        "flow-torus-sphere",
        "The explicit V-harmonic heat flow from the flat torus drives a perturbed constant map into the sphere to a V-harmonic map.",
        DEFAULT_SAMPLER,
        vec![
            global(
                "flow converges",
                Operation::FlowFinalResidual { flow: plain.clone() },
                below(TOLERANCES.flow),
            ),
            global(
                "residual non-increasing after step 10",
                Operation::FlowMaxIncrease {
                    flow: plain.clone(),
                    after: 10,
                },
                Expectation::AtMost { bound: 0.0 },
            ),
            global(
                "flow commutes with grid translation",
                Operation::FlowShiftEquivariance {
                    flow: plain,
                    shift: [5, 11],
                },
                below(1e-12),
            ),
            global(
                "second-order consistency",
                Operation::FlowConsistency {
                    target: s("sphere-stereo"),
                    map: s("torus-wave"),
                    field: None,
                    coarse: 32,
                },
                Expectation::Within { lo: 3.5, hi: 4.5 },
            ),
            global(
                "flow with constant drift converges",
                Operation::FlowFinalResidual {
                    flow: sphere_flow(some("torus-drift")),
                },
                below(TOLERANCES.flow),
            ),
        ],
    )
}

/// The twelve compiled-in scenarios, in order.
pub fn builtin_registry() -> &'static [ScenarioSpec] {
    static REG: OnceLock<Vec<ScenarioSpec>> = OnceLock::new();
    REG.get_or_init(|| {
        vec![
            s1(),
            s2(),
            s3(),
            s4(),
            s5(),
            s6(),
            s7(),
            s8(),
            s9(),
            s10(),
            s11(),
            s12(),
        ]
    })
}

/// Read scenarios from a JSON file holding an array of scenario specs.
pub fn load_registry_file(path: &Path) -> Result<Vec<ScenarioSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidConfig(format!("cannot read registry {}: {e}", path.display()))
    })?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("cannot parse registry {}: {e}", path.display())))
}

/// Built-in scenarios plus any custom ones.
#[derive(Clone, Debug)]
pub struct Registry {
    scenarios: Vec<ScenarioSpec>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    pub fn builtin() -> Self {
        Self {
            scenarios: builtin_registry().to_vec(),
        }
    }

    /// Custom names must not shadow built-in ones.
    pub fn with_custom(custom: Vec<ScenarioSpec>) -> Result<Self> {
        let mut reg = Self::builtin();
        for sc in custom {
            if reg
                .scenarios
                .iter()
                .any(|x| x.name == sc.name || x.title == sc.name)
            {
                return Err(Error::InvalidConfig(format!(
                    "scenario name {} is already registered",
                    sc.name
                )));
            }
            reg.scenarios.push(sc);
        }
        Ok(reg)
    }

    pub fn scenarios(&self) -> &[ScenarioSpec] {
        &self.scenarios
    }

    /// Look up by name (`S4`) or title (`hopf-complex-line`).
    pub fn find(&self, name: &str) -> Result<&ScenarioSpec> {
        self.scenarios
            .iter()
            .find(|s| s.name == name || s.title == name)
            .ok_or_else(|| Error::not_found("scenario", name))
    }
}
