use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use counting::{check_script, CountDecl, CountError, Kernel, KernelOptions, ScriptVerdict};
use enumeration::{discharge, gen_injective_vcs, gen_surjective_vcs, BundleKind, DischargeOptions};
use qhl::{check_well_defined, Comparator, WellDefined};
use smt_backend::{Backend, Query, Solver, SolverError, Status, Verdict};
use term_core::{Sort, Tag, Term, Var};
use transition_system::{check_totality, check_valid, Totality, Validity};

use crate::project::Project;
use crate::report::{FinalVerdict, ObligationVerdict, PropertySummary, Report, StageReport, REPORT_SCHEMA};

pub const STAGES: [&str; 4] = ["well-definedness", "enumeration", "counting", "final"];

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub solver: Option<PathBuf>,
    /// Per query.
    pub timeout_ms: u64,
    pub debug_dir: Option<PathBuf>,
    pub threads: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { solver: None, timeout_ms: 60_000, debug_dir: None, threads: 4 }
    }
}

impl VerifyOptions {
    pub fn solver(&self) -> Solver {
        Solver::resolve(self.solver.as_deref()).with_timeout(self.timeout_ms).with_debug_dir(self.debug_dir.clone())
    }
}

pub fn tool_id() -> String {
    format!("qhenum {}", env!("CARGO_PKG_VERSION"))
}

fn from_validity(v: &Validity) -> ObligationVerdict {
    match v {
        Validity::Valid => ObligationVerdict::Proved,
        Validity::Invalid(_) => ObligationVerdict::Failed,
        Validity::Unknown(_) => ObligationVerdict::Unknown,
    }
}

/// Syntactic well-definedness, plus parameters never changing along a trace.
/// Cap on the advisory totality query, which often has no quick answer.
const TOTALITY_TIMEOUT_MS: u64 = 5_000;

struct Capped<'a>(&'a dyn Backend, u64);

impl Backend for Capped<'_> {
    fn solve(&self, q: &Query) -> Result<Verdict, SolverError> {
        let mut q = q.clone();
        q.timeout_ms = Some(q.timeout_ms.map_or(self.1, |t| t.min(self.1)));
        self.0.solve(&q)
    }

    fn id(&self) -> String {
        self.0.id()
    }
}

/// Counts over a system with dead-end states are outside what the
/// enumeration argument covers; this warns and does not fail.
fn totality_warning(p: &Project, backend: &dyn Backend) -> Option<String> {
    match check_totality(&p.system, &Capped(backend, TOTALITY_TIMEOUT_MS)).0 {
        Totality::Total => None,
        Totality::NotTotal(_) => Some("the transition relation is not total; some states have no successor".into()),
        Totality::Unknown(r) => Some(format!("totality of the transition relation not established ({})", r)),
    }
}

fn well_definedness(p: &Project, backend: &dyn Backend) -> StageReport {
    let mut st = StageReport::new(STAGES[0]);
    match check_well_defined(&p.property, &p.system) {
        WellDefined::Ok => st.push("syntactic", ObligationVerdict::Proved, 0),
        WellDefined::Rejected(why) => {
            st.push("syntactic", ObligationVerdict::Failed, 0);
            st.fail(Some(why));
            return st;
        }
    }
    let sys = &p.system;
    let frozen = Term::and(
        sys.params
            .iter()
            .map(|z| Term::eq(Term::var(Var::new(z.clone(), Tag::Primed)), Term::var(Var::plain(z.clone()))))
            .collect(),
    );
    let mut env = sys.env(Tag::Plain);
    env.extend(sys.env(Tag::Primed));
    let label = format!("{}/{}/params-frozen", p.name, STAGES[0]);
    let (v, ms) = check_valid(&label, std::slice::from_ref(&sys.tx), &frozen, &env, &sys.sig, backend);
    st.push("params-frozen", from_validity(&v), ms);
    match v {
        Validity::Valid => {}
        Validity::Invalid(_) => st.fail(Some("the transition relation can change a parameter".into())),
        Validity::Unknown(r) => st.unknown(format!("params-frozen: {}", r)),
    }
    st
}

fn enumeration_stage(p: &Project, backend: &dyn Backend, opts: &VerifyOptions) -> StageReport {
    let mut st = StageReport::new(STAGES[1]);
    let kinds: &[BundleKind] = match p.property.cmp {
        Comparator::Ge => &[BundleKind::Injective],
        Comparator::Le => &[BundleKind::Surjective],
        Comparator::Eq => &[BundleKind::Injective, BundleKind::Surjective],
    };
    for &kind in kinds {
        let bundle = match kind {
            BundleKind::Injective => gen_injective_vcs(&p.system, &p.property, &p.witness),
            BundleKind::Surjective => gen_surjective_vcs(&p.system, &p.property, &p.witness),
        };
        let bundle = match bundle {
            Ok(b) => b,
            Err(e) => {
                st.fail(Some(format!("{}: {}", kind.name(), e)));
                continue;
            }
        };
        let dopts = DischargeOptions { prefix: p.name.clone(), threads: opts.threads };
        let r = discharge(&bundle, backend, &dopts);
        for o in &r.results {
            let v = match &o.verdict {
                enumeration::ObligationVerdict::Proved => ObligationVerdict::Proved,
                enumeration::ObligationVerdict::Failed(_) => ObligationVerdict::Failed,
                enumeration::ObligationVerdict::Unknown(_) => ObligationVerdict::Unknown,
            };
            st.push(format!("{}/{}", kind.name(), o.label), v, o.time_ms);
        }
        if let Some(f) = r.first_failure() {
            let d = format!("{}/{} {}", kind.name(), f.label, f.verdict.name());
            if st.verdict == crate::report::StageVerdict::Failed {
                st.fail(Some(d));
            } else {
                st.unknown(d);
            }
        }
    }
    st
}

fn counting_stage(p: &Project, backend: &dyn Backend, opts: &VerifyOptions) -> StageReport {
    let mut st = StageReport::new(STAGES[2]);
    let kopts = KernelOptions { prefix: p.name.clone(), timeout_ms: Some(opts.timeout_ms) };
    let r = check_script(&p.script, backend, &kopts);
    for q in &r.premises {
        let v = match q.status {
            Status::Unknown => ObligationVerdict::Unknown,
            s if s == expected_status(q.expect) => ObligationVerdict::Proved,
            _ => ObligationVerdict::Failed,
        };
        let name = q.query.strip_prefix(&format!("{}/", p.name)).unwrap_or(&q.query);
        st.push(name, v, q.time_ms);
    }
    if let ScriptVerdict::Rejected { at, reason } = &r.verdict {
        let d = format!("rejected at {}: {}", at, reason);
        match reason {
            CountError::QueryUnknown { .. } => st.unknown(d),
            _ => st.fail(Some(d)),
        }
    }
    st
}

fn expected_status(e: counting::Expect) -> Status {
    match e {
        counting::Expect::Valid | counting::Expect::Unsat => Status::Unsat,
        counting::Expect::Sat => Status::Sat,
    }
}

/// The count the goal talks about: the declaration over exactly the
/// enumeration variables, and its application in the claim.
fn goal_count(p: &Project) -> Result<(&CountDecl, Term), String> {
    let goal = p.script.goal.as_ref().ok_or("the proof has no goal")?;
    let want: BTreeMap<&str, &Sort> = p.witness.enum_vars.iter().map(|(n, s)| (n.as_str(), s)).collect();
    let mut found = None;
    goal.claim.walk(&mut |t| {
        if let Term::App(f, _) = t {
            if found.is_some() {
                return;
            }
            if let Some(d) = p.script.decls.iter().find(|d| &d.name == f) {
                let have: BTreeMap<&str, &Sort> = d.vars.iter().map(|(n, s)| (n.as_str(), s)).collect();
                if have == want {
                    found = Some((d, t.clone()));
                }
            }
        }
    });
    found.ok_or_else(|| "no count in the goal ranges over the enumeration variables".to_string())
}

/// Link the script's count to the enumeration's Valid and the claim to N(Z).
fn final_stage(p: &Project, backend: &dyn Backend, opts: &VerifyOptions) -> StageReport {
    let mut st = StageReport::new(STAGES[3]);
    let (decl, app) = match goal_count(p) {
        Ok(x) => x,
        Err(e) => {
            st.fail(Some(e));
            return st;
        }
    };
    let goal = p.script.goal.as_ref().expect("goal_count checked it");
    let kopts = KernelOptions { prefix: p.name.clone(), timeout_ms: Some(opts.timeout_ms) };
    let mut k = match Kernel::new(&p.script.decls, &p.script.recs, backend, kopts) {
        Ok(k) => k,
        Err(e) => {
            st.fail(Some(e.to_string()));
            return st;
        }
    };
    k.declare_external(&p.system.sig);
    k.set_step(STAGES[3]);

    let Term::App(_, args) = &app else { unreachable!() };
    let inst: BTreeMap<Var, Term> = decl.params.iter().map(|z| Var::plain(z.clone())).zip(args.iter().cloned()).collect();
    let mut venv: BTreeMap<Var, Sort> = BTreeMap::new();
    for (n, s) in &p.witness.enum_vars {
        venv.insert(Var::plain(n.clone()), s.clone());
    }
    let link = Term::iff(p.witness.valid.clone(), decl.formula.subst(&inst));

    let guard = goal.guard.clone().unwrap_or_else(Term::tt);
    let claim = Term::implies(guard.clone(), goal.claim.clone());
    let init = p.system.init.clone();
    let env = p.system.env(Tag::Plain);
    let bound = p.property.bound.clone();
    let mut queries = vec![
        ("valid-link", vec![], link, venv),
        (
            "bound",
            vec![init.clone(), claim.clone()],
            Term::and(vec![guard, p.property.cmp.term(app.clone(), bound.clone())]),
            env.clone(),
        ),
    ];
    if p.property.cmp == Comparator::Le {
        // With no related traces the count is 0, which must also be within N(Z).
        queries.push(("empty-bound", vec![init, claim, Term::ge(app.clone(), Term::int(0))], Term::le(Term::int(0), bound), env));
    }
    for (name, hyps, g, env) in queries {
        let t0 = Instant::now();
        let r = k.entails(name, hyps, g, &env);
        let ms = k.premises.last().map(|q| q.time_ms).unwrap_or_else(|| t0.elapsed().as_millis() as u64);
        match r {
            Ok(_) => st.push(name, ObligationVerdict::Proved, ms),
            Err(CountError::QueryUnknown { reason, .. }) => {
                st.push(name, ObligationVerdict::Unknown, ms);
                st.unknown(format!("{}: {}", name, reason));
            }
            Err(e) => {
                st.push(name, ObligationVerdict::Failed, ms);
                st.fail(Some(format!("{}: {}", name, e)));
            }
        }
    }
    st
}

/// Run every stage in order; a stage that does not pass skips the rest.
pub fn verify(p: &Project, opts: &VerifyOptions) -> Report {
    let solver = opts.solver();
    verify_with(p, &solver, &solver.version(), opts)
}

pub fn verify_with(p: &Project, backend: &dyn Backend, solver_id: &str, opts: &VerifyOptions) -> Report {
    let t0 = Instant::now();
    let mut report = Report {
        schema: REPORT_SCHEMA.to_string(),
        tool: tool_id(),
        solver: solver_id.to_string(),
        project: p.name.clone(),
        property: PropertySummary { cmp: p.property.cmp.keyword().to_string(), bound: p.property.bound.to_string() },
        stages: vec![],
        verdict: FinalVerdict::Unknown,
        failed_stage: None,
        warnings: totality_warning(p, backend).into_iter().collect(),
        time_ms: 0,
    };
    let runs: [&dyn Fn() -> StageReport; 4] = [
        &|| well_definedness(p, backend),
        &|| enumeration_stage(p, backend, opts),
        &|| counting_stage(p, backend, opts),
        &|| final_stage(p, backend, opts),
    ];
    let mut blocked = false;
    for (name, run) in STAGES.iter().zip(runs) {
        if blocked {
            report.stages.push(StageReport::skipped(name));
            continue;
        }
        let st = run();
        blocked = !st.passed();
        report.stages.push(st);
    }
    report.conclude();
    report.time_ms = t0.elapsed().as_millis() as u64;
    report
}
