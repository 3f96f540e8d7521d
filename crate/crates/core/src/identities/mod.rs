//! Registry of curvature identities as residual checks with hypothesis gates.

pub mod contract;
mod checks;

use std::sync::OnceLock;

use serde::Serialize;

use crate::algebra::{Residual, Sector};
use crate::chart::MetricChart;
use crate::geometry::{CurvaturePoint, CurvatureRequest};

pub type CheckFn = fn(&CurvaturePoint, Option<Sector>) -> Vec<Residual>;

/// Hypothesis under which an identity is asserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gate {
    Any,
    HarmonicWeyl,
    Einstein,
    Einstein4D,
    /// Einstein with `∇W± = 0` and `W± ≠ 0` in the identity's sector.
    ParallelSector,
}

impl Gate {
    pub fn label(self) -> &'static str {
        match self {
            Gate::Any => "[any]",
            Gate::HarmonicWeyl => "[harmonic-Weyl,4D]",
            Gate::Einstein => "[Einstein]",
            Gate::Einstein4D => "[Einstein,4D]",
            Gate::ParallelSector => "[Einstein,∇W±=0]",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scope {
    Pointwise,
    /// Integral statement listed for coverage only.
    Global,
    /// Declared chart properties compared against measurement.
    Audit,
}

/// One registry entry.
#[derive(Debug, Clone)]
pub struct Identity {
    pub id: &'static str,
    /// Source labels this entry covers.
    pub anchors: &'static [&'static str],
    pub gate: Gate,
    pub sector: Option<Sector>,
    pub depth: usize,
    pub laplacian: Option<usize>,
    pub cotton_derivative: bool,
    /// Homogeneity degree in curvature units: every term scales like `|Riem|^{weight/2}`.
    pub weight: u32,
    /// Expected to fail on negative-control charts.
    pub control: bool,
    pub scope: Scope,
    pub statement: &'static str,
    pub check: Option<CheckFn>,
}

impl Identity {
    pub fn request(&self) -> CurvatureRequest {
        CurvatureRequest {
            depth: self.depth,
            laplacian: self.laplacian,
            cotton_derivative: self.cotton_derivative,
            ..Default::default()
        }
    }

    pub fn jets(&self) -> usize {
        self.request().required_jet_order()
    }

    /// Pass threshold on `residual_rel`.
    pub fn tolerance(&self) -> f64 {
        if self.derivative_free() {
            return 1e-12;
        }
        match self.jets() {
            0..=4 => 1e-8,
            5 => 1e-6,
            _ => 1e-5,
        }
    }

    pub fn noise(&self) -> f64 {
        if self.derivative_free() {
            ALGEBRA_NOISE
        } else {
            NOISE
        }
    }

    /// Built from curvature values alone, with no derivative data.
    pub fn derivative_free(&self) -> bool {
        self.scope == Scope::Pointwise && self.depth == 0 && self.laplacian.is_none() && !self.id.starts_with("cotton")
    }

    /// Listing line: id, gate, jet requirement or scope marker, anchors.
    pub fn listing(&self) -> String {
        let status = match self.scope {
            Scope::Global => "out-of-scope(global)".to_string(),
            _ => format!("jets:{}", self.jets()),
        };
        let mut line = format!("{}  {}  {}", self.id, self.gate.label(), status);
        if !self.anchors.is_empty() {
            line.push_str("  ");
            line.push_str(&self.anchors.join(","));
        }
        if self.control {
            line.push_str("  negative-control");
        }
        line
    }
}

/// Relative noise floor per curvature unit for identities with derivative data.
pub const NOISE: f64 = 1e-3;
/// Noise floor for derivative-free identities, whose terms are all of size
/// `|Riem|^{w/2}` or rounding noise.
pub const ALGEBRA_NOISE: f64 = 1.0;
/// Residual above which a negative-control point counts as failing.
pub const CONTROL_THRESHOLD: f64 = 1e-2;
/// Fraction of negative-control points that must fail.
pub const CONTROL_FRACTION: f64 = 0.6;

/// `abs / max(scale, noise·|Riem|^{w/2}, 1e-30)`.
pub fn relative_residual(r: &Residual, curvature_scale: f64, weight: u32, noise: f64) -> f64 {
    let floor = noise * curvature_scale.powf(weight as f64 / 2.0);
    r.abs / r.scale.max(floor).max(1e-30)
}

/// Properties measured at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hypotheses {
    pub einstein: bool,
    /// `R/4`
    pub einstein_constant: f64,
    pub harmonic_weyl: bool,
    pub conformally_flat: bool,
    /// `∇W± = 0`, indexed plus, minus.
    pub parallel: [bool; 2],
    /// `|W±| > 1e-6 |Riem|`
    pub nonzero: [bool; 2],
}

const GATE_TOL: f64 = 1e-9;

fn sector_index(s: Sector) -> usize {
    match s {
        Sector::Plus => 0,
        Sector::Minus => 1,
    }
}

/// Measures the gating hypotheses; needs `∇W`.
pub fn measure(cp: &CurvaturePoint) -> Hypotheses {
    let kappa = cp.curvature_scale();
    let k32 = kappa.powf(1.5);
    let trace_free = cp.ric.sub(&crate::tensor::DenseTensor::identity().scale(cp.scalar / 4.0)).unwrap();
    let dw = cp.dw(1);
    let div = contract::e("ijkli->jkl", &[dw]).norm();
    let par = |s| cp.dw_sector(1, s).norm() <= GATE_TOL * k32;
    let nz = |s| cp.dw_sector(0, s).norm() > 1e-6 * kappa;
    Hypotheses {
        einstein: trace_free.norm() <= GATE_TOL * kappa,
        einstein_constant: cp.scalar / 4.0,
        harmonic_weyl: div <= GATE_TOL * dw.norm().max(k32),
        conformally_flat: cp.weyl.norm() <= GATE_TOL * kappa,
        parallel: [par(Sector::Plus), par(Sector::Minus)],
        nonzero: [nz(Sector::Plus), nz(Sector::Minus)],
    }
}

impl Hypotheses {
    pub fn admits(&self, gate: Gate, sector: Option<Sector>) -> bool {
        match gate {
            Gate::Any => true,
            Gate::HarmonicWeyl => self.harmonic_weyl,
            Gate::Einstein | Gate::Einstein4D => self.einstein,
            Gate::ParallelSector => {
                let s = sector_index(sector.expect("sector gate"));
                self.einstein && self.parallel[s] && self.nonzero[s]
            }
        }
    }

    /// Declared properties that disagree with the measurement.
    pub fn mismatches(&self, chart: &MetricChart, kappa: f64) -> Vec<&'static str> {
        let d = &chart.declared;
        let mut out = Vec::new();
        if d.einstein.is_some() != self.einstein {
            out.push("einstein");
        }
        if let Some(l) = d.einstein {
            if self.einstein && (l - self.einstein_constant).abs() > 1e-8 * l.abs().max(kappa) {
                out.push("einstein-constant");
            }
        }
        if d.ricci_flat != (self.einstein && self.einstein_constant.abs() <= GATE_TOL * kappa) {
            out.push("ricci-flat");
        }
        if d.harmonic_weyl != self.harmonic_weyl {
            out.push("harmonic-weyl");
        }
        if d.parallel_weyl != (self.parallel[0] && self.parallel[1]) {
            out.push("parallel-weyl");
        }
        if d.conformally_flat != self.conformally_flat {
            out.push("conformally-flat");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    /// Negative control failing as expected.
    ExpectedFail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "not_applicable",
            Status::ExpectedFail => "expected_fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheckResult {
    pub identity_id: String,
    pub manifold: String,
    pub point_index: usize,
    pub point: [f64; 4],
    pub residual_abs: f64,
    pub scale: f64,
    pub residual_rel: f64,
    pub status: Status,
    pub jet_order_used: usize,
    /// Set when the identity runs as a negative control on this chart.
    pub control: bool,
}

/// Evaluates one identity at a prepared point. `tolerance` overrides the
/// registry default.
pub fn evaluate(
    identity: &Identity,
    chart: &MetricChart,
    point_index: usize,
    cp: &CurvaturePoint,
    hyp: &Hypotheses,
    tolerance: Option<f64>,
) -> IdentityCheckResult {
    let mut result = IdentityCheckResult {
        identity_id: identity.id.to_string(),
        manifold: chart.name.clone(),
        point_index,
        point: cp.point,
        residual_abs: 0.0,
        scale: 0.0,
        residual_rel: 0.0,
        status: Status::NotApplicable,
        jet_order_used: cp.jet_order,
        control: false,
    };
    let tol = tolerance.unwrap_or_else(|| identity.tolerance());
    if identity.scope == Scope::Audit {
        let m = hyp.mismatches(chart, cp.curvature_scale());
        result.residual_abs = m.len() as f64;
        result.scale = 1.0;
        result.residual_rel = m.len() as f64;
        result.status = if m.is_empty() { Status::Pass } else { Status::Fail };
        return result;
    }
    let Some(check) = identity.check else {
        return result;
    };
    let control = identity.control && chart.declared.negative_control;
    if !control && !hyp.admits(identity.gate, identity.sector) {
        return result;
    }
    let r = Residual::worst(&check(cp, identity.sector));
    result.residual_abs = r.abs;
    result.scale = r.scale;
    result.residual_rel = relative_residual(&r, cp.curvature_scale(), identity.weight, identity.noise());
    result.control = control;
    result.status = if control {
        if result.residual_rel > CONTROL_THRESHOLD {
            Status::ExpectedFail
        } else {
            Status::Pass
        }
    } else if result.residual_rel <= tol {
        Status::Pass
    } else {
        Status::Fail
    };
    result
}

/// Every registered identity, in listing order.
pub fn registry() -> &'static [Identity] {
    static REG: OnceLock<Vec<Identity>> = OnceLock::new();
    REG.get_or_init(build)
}

pub fn by_id(id: &str) -> Option<&'static Identity> {
    registry().iter().find(|i| i.id == id)
}

/// Pointwise entries that can be evaluated.
pub fn checkable() -> impl Iterator<Item = &'static Identity> {
    registry().iter().filter(|i| i.scope != Scope::Global)
}

/// All anchor strings in the registry.
pub fn anchors() -> Vec<&'static str> {
    let mut a: Vec<_> = registry().iter().flat_map(|i| i.anchors.iter().copied()).collect();
    a.sort_unstable();
    a.dedup();
    a
}

struct Spec {
    gate: Gate,
    depth: usize,
    laplacian: Option<usize>,
    weight: u32,
    control: bool,
    cotton_derivative: bool,
}

fn spec(gate: Gate, depth: usize, weight: u32) -> Spec {
    Spec { gate, depth, laplacian: None, weight, control: false, cotton_derivative: false }
}

impl Spec {
    fn lap(mut self, k: usize) -> Self {
        self.laplacian = Some(k);
        self
    }

    fn control(mut self) -> Self {
        self.control = true;
        self
    }

    fn cotton(mut self) -> Self {
        self.cotton_derivative = true;
        self
    }
}

struct Builder(Vec<Identity>);

impl Builder {
    fn add(
        &mut self,
        id: &'static str,
        anchors: &'static [&'static str],
        s: Spec,
        sector: Option<Sector>,
        statement: &'static str,
        check: CheckFn,
    ) {
        self.0.push(Identity {
            id,
            anchors,
            gate: s.gate,
            sector,
            depth: s.depth,
            laplacian: s.laplacian,
            cotton_derivative: s.cotton_derivative,
            weight: s.weight,
            control: s.control,
            scope: Scope::Pointwise,
            statement,
            check: Some(check),
        });
    }

    fn one(&mut self, id: &'static str, anchors: &'static [&'static str], s: Spec, statement: &'static str, check: CheckFn) {
        self.add(id, anchors, s, None, statement, check);
    }

    /// `.full`, `.sector-plus` and `.sector-minus` variants. The ids are
    /// passed explicitly to keep them `'static`.
    #[allow(clippy::too_many_arguments)]
    fn three(
        &mut self,
        ids: [&'static str; 3],
        anchors: &'static [&'static str],
        sector_anchors: &'static [&'static str],
        s: impl Fn() -> Spec,
        statement: &'static str,
        check: CheckFn,
    ) {
        self.add(ids[0], anchors, s(), None, statement, check);
        self.add(ids[1], sector_anchors, s(), Some(Sector::Plus), statement, check);
        self.add(ids[2], sector_anchors, s(), Some(Sector::Minus), statement, check);
    }

    fn sectors(
        &mut self,
        ids: [&'static str; 2],
        anchors: &'static [&'static str],
        s: impl Fn() -> Spec,
        statement: &'static str,
        check: CheckFn,
    ) {
        self.add(ids[0], anchors, s(), Some(Sector::Plus), statement, check);
        self.add(ids[1], anchors, s(), Some(Sector::Minus), statement, check);
    }

    fn global(&mut self, id: &'static str, anchors: &'static [&'static str], statement: &'static str) {
        self.0.push(Identity {
            id,
            anchors,
            gate: Gate::Einstein4D,
            sector: None,
            depth: 0,
            laplacian: None,
            cotton_derivative: false,
            weight: 0,
            control: false,
            scope: Scope::Global,
            statement,
            check: None,
        });
    }
}

fn build() -> Vec<Identity> {
    use checks as c;
    use Gate::*;
    let mut b = Builder(Vec::new());

    b.0.push(Identity {
        id: "hypotheses.declared",
        anchors: &[],
        gate: Any,
        sector: None,
        depth: 1,
        laplacian: None,
        cotton_derivative: false,
        weight: 0,
        control: false,
        scope: Scope::Audit,
        statement: "declared chart properties (Einstein, harmonic W, parallel W, W = 0) match measurement",
        check: None,
    });

    // algebra
    b.one("weyl.trace-free", &["Weyl"], spec(Any, 0, 2), "W_ijil = 0", c::weyl_trace_free);
    b.one("bianchi1.weyl", &["unlabeled:first-bianchi-weyl"], spec(Any, 0, 2), "W_ijkt + W_itjk + W_iktj = 0", c::bianchi1);
    b.one(
        "riemann.einstein-form",
        &["RiemannEinstein"],
        spec(Einstein, 0, 2),
        "R_ijkl = W_ijkl + (R/12)(δ_ik δ_jl − δ_il δ_jk)",
        c::riemann_einstein,
    );
    b.three(
        ["algebra.ww-metric.full", "algebra.ww-metric.sector-plus", "algebra.ww-metric.sector-minus"],
        &["WeylWeylMetric"],
        &["WeylWeylMetric"],
        || spec(Any, 0, 4),
        "W_ijkt W_ijkl = ¼|W|² δ_tl",
        c::weyl_weyl_metric,
    );
    b.three(
        ["algebra.www.full", "algebra.www.sector-plus", "algebra.www.sector-minus"],
        &["WWW"],
        &["WWW"],
        || spec(Any, 0, 6),
        "W_ijkl W_ipkq W_jplq = ½ W_ijkl W_ijpq W_klpq",
        c::www,
    );
    b.sectors(
        ["algebra.quartic.sector-plus", "algebra.quartic.sector-minus"],
        &["lem-quart"],
        || spec(Any, 0, 8),
        "(W_pjkl W_pist + W_ipkl W_pjst + W_ijpl W_pkst + W_ijkp W_plst) W_rjkl W_rist = ¼|W±|⁴",
        c::quartic,
    );
    b.sectors(
        ["algebra.eigenframe.sector-plus", "algebra.eigenframe.sector-minus"],
        &["eq-derw", "conv", "unlabeled:quaternionic-structure"],
        || spec(Any, 0, 2),
        "W± = ½(λ ω⊗ω + μ η⊗η + ν θ⊗θ), quaternion relations, W±ω = 2λω",
        c::eigenframe,
    );
    b.one(
        "algebra.block-decomposition",
        &["dec", "unlabeled:curvature-block-decomposition"],
        spec(Any, 0, 2),
        "Riem on Λ⁺ ⊕ Λ⁻ = [[W⁺ + R/12, Ric₀], [Ric₀ᵀ, W⁻ + R/12]], W = W⁺ + W⁻",
        c::block_decomposition,
    );
    b.one(
        "algebra.ricci-weyl-coupling",
        &["unlabeled:ricci-weyl-coupling"],
        spec(Any, 0, 6),
        "2R_pq W_pikl W_qikl = (R/2)|W|²",
        c::ricci_weyl_coupling,
    );

    // Cotton and second Bianchi
    b.one(
        "cotton.symmetries",
        &["CottonSym", "def_cot"],
        spec(Any, 0, 3),
        "C_ijk = −C_ikj, C_ijk + C_jki + C_kij = 0",
        c::cotton_symmetries,
    );
    b.one("cotton.traces", &["CottonTraces"], spec(Any, 0, 3), "C_iik = C_iki = C_kii = 0", c::cotton_traces);
    b.one(
        "cotton.weyl-divergence",
        &["def_Cotton_comp_Weyl"],
        spec(Any, 1, 3),
        "C_ijk = 2 W_tikj,t = −2 W_tijk,t",
        c::cotton_weyl_divergence,
    );
    b.one(
        "cotton.divergence-free",
        &["eq_nulldivcotton"],
        spec(Any, 0, 4).cotton(),
        "C_ijk,i = 0",
        c::cotton_divergence_free,
    );
    b.one(
        "bianchi2.cotton",
        &["fake2ndBianchiWeyl", "lemma_fake2ndBianchiWeyl"],
        spec(Any, 1, 3),
        "W_ijkt,l + W_ijlk,t + W_ijtl,k = ½(C_itl δ_jk + C_ilk δ_jt + C_ikt δ_jl − C_jtl δ_ik − C_jlk δ_it − C_jkt δ_il)",
        c::bianchi2_cotton,
    );
    b.one(
        "bianchi2.harmonic",
        &["2ndBIWeyl"],
        spec(HarmonicWeyl, 1, 3),
        "W_klij,m + W_klmi,j + W_kljm,i = 0",
        c::bianchi2_harmonic,
    );
    b.one(
        "gradweyl.general",
        &["lem_GradWeylNorm"],
        spec(Any, 1, 6),
        "W_ijkl,t W_ijkt,l = ½|∇W|² − |div W|²",
        c::grad_weyl_general,
    );
    b.one(
        "gradweyl.harmonic",
        &["GradWeylNormEinstein"],
        spec(HarmonicWeyl, 1, 6),
        "W_ijkl,t W_ijkt,l = ½|∇W|²",
        c::grad_weyl_harmonic,
    );
    b.one(
        "harmonic.divergences",
        &["harmall"],
        spec(Einstein, 1, 3),
        "W_tijk,t = 0, R_tijk,t = 0",
        c::harmonic_divergences,
    );

    // commutation
    b.one(
        "commutation2.riemann",
        &["SecondDerivWeylusingRiem"],
        spec(Any, 2, 4),
        "W_ijkl,st − W_ijkl,ts = W_pjkl R_pist + W_ipkl R_pjst + W_ijpl R_pkst + W_ijkp R_plst",
        c::commutation2_riemann,
    );
    b.one(
        "commutation2.general",
        &["unlabeled:commutation-curvature-split"],
        spec(Any, 2, 4),
        "second commutation with R_pist = W_pist + Schouten wedge",
        c::commutation2_general,
    );
    b.one(
        "commutation2.einstein",
        &["lem-comsec"],
        spec(Einstein4D, 2, 4),
        "W_ijkl,st − W_ijkl,ts = W·W terms + (R/12)(W_sjkl δ_it − W_tjkl δ_is + …)",
        c::commutation2_einstein,
    );
    b.one(
        "commutation2.contracted",
        &["unlabeled:einstein-commutation-contraction"],
        spec(Einstein4D, 2, 4),
        "W_ijkl,si = W_irkl W_rjsi + W_ijrl W_rksi + W_ijkr W_rlsi + (R/4) W_sjkl",
        c::commutation2_contracted,
    );
    b.one(
        "commutation2.first-term",
        &["firstterm"],
        spec(Any, 2, 4),
        "W_klmi,jm − W_klmi,mj = −W_rlmi W_rkmj + W_rkmi W_rlmj − W_mirj W_mrlk − R_rj W_irkl + Ricci couplings",
        c::commutation2_first_term,
    );
    b.one(
        "commutation3.explicit",
        &["ThirdDerivWeylusingRiem"],
        spec(Any, 3, 5),
        "W_ijkl,trs − W_ijkl,tsr = Σ over the five slots of W_…p…,· R_p·rs",
        c::commutation3_explicit,
    );
    b.one(
        "commutation3.korder",
        &["CommutationWeylKorder", "LE_commutationKorderWeyl"],
        spec(Any, 3, 5),
        "∇³W commutator as the curvature action on ∇W",
        c::commutation3_korder,
    );
    b.one(
        "commutation4.korder",
        &["CommutationWeylKorder"],
        spec(Any, 4, 6),
        "∇⁴W commutator as the curvature action on ∇²W",
        c::commutation4_korder,
    );

    // Laplacian of W and the first Bochner formulas
    b.one(
        "laplacian.harmonic",
        &["LaplacianOfHarmonicWeyl"],
        spec(HarmonicWeyl, 2, 4),
        "ΔW_ijkl = Ricci·W and W·W terms",
        c::laplacian_harmonic,
    );
    b.one(
        "laplacian.commutator-form",
        &["LaplW_eq1"],
        spec(HarmonicWeyl, 2, 4),
        "−W_klij,mm − (W_klmi,jm − W_klmi,mj) + (W_mjkl,im − W_mjkl,mi) = 0",
        c::laplacian_step,
    );
    b.one(
        "laplacian.bw",
        &["eq-bw"],
        spec(HarmonicWeyl, 2, 4),
        "ΔW = (R/2)W − 2(W_ipjq W_pqkl − W_ipql W_jpqk + W_ipqk W_jpql)",
        c::laplacian_bw,
    );
    b.one(
        "laplacian.bw-rewritten",
        &["unlabeled:bw-rewritten"],
        spec(HarmonicWeyl, 2, 4),
        "ΔW = (R/2)W − W_ijpq W_klpq − 2(W_ipkq W_jplq − W_iplq W_jpkq)",
        c::laplacian_bw_rewritten,
    );
    b.one(
        "bochner1.harmonic",
        &["BWHarmonicWeyl"],
        spec(HarmonicWeyl, 1, 6).lap(0),
        "½Δ|W|² = |∇W|² + 2R_pq W_pikl W_qikl − 2(2W_ijkl W_ipkq W_jplq + ½W_ijkl W_ijpq W_klpq)",
        c::bochner_weyl_harmonic,
    );
    b.three(
        ["bochner1.nice.full", "bochner1.nice.sector-plus", "bochner1.nice.sector-minus"],
        &["nice"],
        &["niceself"],
        || spec(HarmonicWeyl, 1, 6).lap(0),
        "½Δ|W|² = |∇W|² + (R/2)|W|² − 3W_ijkl W_ijpq W_klpq",
        c::bochner_nice,
    );

    // key lemmas and the eigenframe calculus
    b.add(
        "key1.full",
        &["lem-key1"],
        spec(HarmonicWeyl, 1, 8).control(),
        None,
        "W_ijkl W_jpqt,k W_ipqt,l = −½ W_ijkl W_ijpq,t W_klpq,t",
        c::key1,
    );
    b.add(
        "key1.sector-plus",
        &["lem-key1", "gianni"],
        spec(HarmonicWeyl, 1, 8),
        Some(Sector::Plus),
        "W⁺_ijkl W⁺_jpqt,k W⁺_ipqt,l = −½ W⁺_ijkl W⁺_ijpq,t W⁺_klpq,t",
        c::key1,
    );
    b.add(
        "key1.sector-minus",
        &["lem-key1"],
        spec(HarmonicWeyl, 1, 8),
        Some(Sector::Minus),
        "W⁻_ijkl W⁻_jpqt,k W⁻_ipqt,l = −½ W⁻_ijkl W⁻_ijpq,t W⁻_klpq,t",
        c::key1,
    );
    b.three(
        ["key2.full", "key2.sector-plus", "key2.sector-minus"],
        &["lem-key2"],
        &["lem-key2"],
        || spec(Any, 1, 8),
        "W_ijkl W_ipkq,t W_jplq,t = ½ W_ijkl W_ijpq,t W_klpq,t",
        c::key2,
    );
    b.one(
        "key.sector-additivity",
        &["unlabeled:orthogonal-decomposition"],
        spec(Any, 1, 8),
        "W∇W∇W = W⁺∇W⁺∇W⁺ + W⁻∇W⁻∇W⁻, mixed terms vanish",
        c::sector_additivity,
    );
    b.sectors(
        ["mix.sector-plus", "mix.sector-minus"],
        &["eq-mix"],
        || spec(Any, 1, 8),
        "W±_ijkl W∓_jpqt,k W∓_ipqt,l = 0",
        c::mix,
    );
    b.sectors(
        ["derder.sector-plus", "derder.sector-minus"],
        &["eq-derder"],
        || spec(Any, 1, 3),
        "∇W± in the eigenframe: dλ, dμ, dν and the connection one-forms",
        c::derder,
    );
    b.sectors(
        ["nqder.sector-plus", "nqder.sector-minus"],
        &["eq-nqder"],
        || spec(Any, 1, 6),
        "¼|∇W±|² = |dλ|² + |dμ|² + |dν|² + 2((λ−μ)²|c|² + (ν−λ)²|b|² + (μ−ν)²|a|²)",
        c::nqder,
    );
    b.sectors(
        ["eqrhs.sector-plus", "eqrhs.sector-minus"],
        &["eqrhs"],
        || spec(Any, 1, 8),
        "⅛ W±∇W±∇W± = λ|dλ|² + μ|dμ|² + ν|dν|² − ν(λ−μ)²|c|² − μ(ν−λ)²|b|² − λ(μ−ν)²|a|²",
        c::eqrhs,
    );
    b.sectors(
        ["divz.sector-plus", "divz.sector-minus"],
        &["eq-divz"],
        || spec(HarmonicWeyl, 1, 3),
        "dλ = (λ−μ)θc + (λ−ν)ηb and cyclic",
        c::divz,
    );

    // rough Bochner formulas
    b.one(
        "bochner-rough.k1.riemann",
        &["pro-boch"],
        spec(Einstein4D, 3, 8).lap(1),
        "½Δ|∇W|² = |∇²W|² + ⟨∇W, ∇ΔW⟩ + (R/4)|∇W|² + 8W_ijkl,s W_rjkl,t R_rist + 2W_ijkl,s W_ijkl,t ...",
        c::rough_bochner_k1,
    );
    b.one(
        "bochner-rough.k1.weyl",
        &["pro-boch"],
        spec(Einstein4D, 3, 8).lap(1),
        "½Δ|∇W|² = |∇²W|² + ⟨∇W, ∇ΔW⟩ + (R/4)|∇W|² + 8W_ijkl,s W_rjkl,t W_rist + (2R/3) W_ijkl,s W_sjkl,i",
        c::rough_bochner_k1_weyl,
    );
    b.one(
        "bochner-rough.k2.riemann",
        &["pro-boch-k", "BochnerBIG"],
        spec(Einstein4D, 4, 10).lap(2),
        "½Δ|∇²W|² = |∇³W|² + ⟨∇²W, ∇Δ∇W⟩ + (R/4)|∇²W|² + curvature couplings",
        c::rough_bochner_k2,
    );
    b.one(
        "bochner-rough.k2.explicit",
        &["unlabeled:rough-bochner-k2-shape"],
        spec(Einstein4D, 4, 10).lap(2),
        "curvature terms 8W_ijkl,tr W_pjkl,ts R_pirs + 2W_ijkl,tr W_ijkl,ps R_ptrs",
        c::rough_bochner_k2_explicit,
    );
    b.sectors(
        ["bochner-rough-pm.k1.sector-plus", "bochner-rough-pm.k1.sector-minus"],
        &["pro-boch-k-pm", "BochnerBIGpm"],
        || spec(Einstein4D, 3, 8).lap(1),
        "rough Bochner formula for ∇W±",
        c::rough_bochner_k1,
    );
    b.sectors(
        ["bochner-rough-pm.k2.sector-plus", "bochner-rough-pm.k2.sector-minus"],
        &["pro-boch-k-pm", "BochnerBIGpm"],
        || spec(Einstein4D, 4, 10).lap(2),
        "rough Bochner formula for ∇²W±",
        c::rough_bochner_k2,
    );

    // second Bochner formula and Laplacians of norms
    b.one(
        "bochner2.teo-sbf",
        &["teo-sbf"],
        spec(Einstein4D, 2, 8).lap(1).control(),
        "½Δ|∇W|² = |∇²W|² + (13/12)R|∇W|² − 10 W_ijkl W_ijpq,t W_klpq,t",
        c::second_bochner,
    );
    b.one(
        "bochner2.paolo",
        &["lem-paolo"],
        spec(HarmonicWeyl, 3, 8),
        "⟨∇W, ∇ΔW⟩ = ½R|∇W|² − 6 W_ijkl W_ijpq,t W_klpq,t",
        c::grad_laplacian,
    );
    b.one(
        "laplacian-norm.k0",
        &["unlabeled:laplacian-of-weyl-norm"],
        spec(Any, 2, 6).lap(0),
        "½Δ|W|² = |∇W|² + ⟨W, ΔW⟩",
        c::laplacian_norm_k0,
    );
    b.one(
        "laplacian-norm.k1",
        &["Delta1"],
        spec(Any, 3, 8).lap(1),
        "½Δ|∇W|² = |∇²W|² + W_ijkl,s W_ijkl,stt",
        c::laplacian_norm_k1,
    );
    b.one(
        "laplacian-norm.k2",
        &["Delta1orderkrough"],
        spec(Any, 4, 10).lap(2),
        "½Δ|∇²W|² = |∇³W|² + W_ijkl,ab W_ijkl,abtt",
        c::laplacian_norm_k2,
    );

    // pointwise reduction of the gap statement
    b.sectors(
        ["gap.sector-plus", "gap.sector-minus"],
        &["unlabeled:final-proposition"],
        || spec(ParallelSector, 1, 4),
        "6|W±|² = R² when ∇W± = 0 and W± ≠ 0",
        c::pointwise_gap,
    );

    // integral statements
    b.global("global.prop1", &["prop1"], "integral second Bochner identity on compact Einstein manifolds");
    b.global("global.thm-intbochintro", &["thm-intbochintro"], "integral Bochner formula (introduction)");
    b.global("global.cor-d2", &["cor-d2"], "integral identity for |∇²W|²");
    b.global("global.lem-1", &["lem-1"], "integral lemma on ∇W");
    b.global("global.pro-imprhess", &["pro-imprhess"], "improved integral Hessian estimate");
    b.global("global.eq-deltas", &["eq-deltas"], "∫|ΔW|² in terms of ∫R|∇W|² and ∫W∇W∇W");
    b.global("global.eq-equality", &["eq-equality"], "equality case of the integral estimate");
    b.global("global.thm-gap", &["thm-gap"], "integral gap theorem");
    b.global("global.teo-gapsa", &["teo-gapsa"], "integral gap theorem, self-dual case");
    b.global("global.teo-idsa", &["teo-idsa"], "integral identity, self-dual case");
    b.global("global.eq-lapsel", &["eq-lapsel"], "∫|ΔW⁺|² in terms of ∫R|∇W⁺|² and ∫W⁺∇W⁺∇W⁺");
    b.global("global.gap-corollaries", &["unlabeled:gap-corollaries"], "gap corollaries");
    b.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        let mut ids: Vec<_> = registry().iter().map(|i| i.id).collect();
        let n = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }

    #[test]
    fn tolerances_follow_jet_order() {
        assert_eq!(by_id("algebra.www.full").unwrap().tolerance(), 1e-12);
        assert_eq!(by_id("bianchi2.cotton").unwrap().tolerance(), 1e-8);
        assert_eq!(by_id("bochner2.teo-sbf").unwrap().tolerance(), 1e-6);
        assert_eq!(by_id("bochner-rough.k2.riemann").unwrap().tolerance(), 1e-5);
    }

    #[test]
    fn listing_format() {
        assert!(by_id("bochner2.teo-sbf").unwrap().listing().starts_with("bochner2.teo-sbf  [Einstein,4D]  jets:5"));
        assert!(by_id("global.prop1").unwrap().listing().contains("out-of-scope(global)"));
    }

    #[test]
    fn relative_residual_uses_floor() {
        let r = Residual { abs: 1e-20, scale: 0.0 };
        assert_eq!(relative_residual(&r, 0.0, 4, NOISE), 1e-20 / 1e-30);
        let r = Residual { abs: 1e-10, scale: 1e-12 };
        assert!((relative_residual(&r, 1.0, 4, NOISE) - 1e-7).abs() < 1e-20);
    }
}
