//! Verification tasks as trait objects, registered by name. A `Context`
//! holds the resolved config and lazily built shared state, so several tasks
//! on one scenario build the lattice, the scenario and the trivialization once.

use crate::config::{ConfigError, Module, Numeric, Resolved, ScenarioConfig};
use crate::report::TaskReport;
use std::cell::OnceCell;
use std::collections::BTreeMap;
use tmotive::analytic::AnalyticModule;
use tmotive::lattice::{lattice_to_drinfeld, LatticeDef};
use tmotive::motives::{frame_matrices, FrameSet};
use tmotive::thirdkind::{PipelineParts, Scenario, ScenarioInput, ThirdKindReport};
use tmotive::{CInf, MathError};

/// What a task needs from the config.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Needs {
    Symbolic,
    /// A module (Carlitz or lattice) with field and precision.
    Module,
    /// A lattice module and a delta.
    Extension,
}

pub trait VerificationTask: Send + Sync {
    fn name(&self) -> &'static str;
    fn needs(&self) -> Needs;
    fn run(&self, ctx: &Context) -> TaskReport;
}

#[derive(Default)]
pub struct Registry {
    tasks: BTreeMap<&'static str, Box<dyn VerificationTask>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with the eight standard tasks.
    pub fn standard() -> Self {
        let mut r = Self::new();
        for t in crate::tasks::all() {
            r.register(t);
        }
        r
    }

    pub fn register(&mut self, task: Box<dyn VerificationTask>) {
        self.tasks.insert(task.name(), task);
    }

    pub fn get(&self, name: &str) -> Option<&dyn VerificationTask> {
        self.tasks.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.tasks.keys().copied()
    }

    /// Check that every task exists and that the config supplies what it needs.
    pub fn check(&self, cfg: &ScenarioConfig, res: &Resolved, tasks: &[String]) -> Result<(), ConfigError> {
        for name in tasks {
            let t = self.get(name).ok_or_else(|| cfg.invalid(format!("unknown task {name:?}")))?;
            let module = res.numeric.as_ref().and_then(|n| n.module.as_ref());
            let ok = match t.needs() {
                Needs::Symbolic => true,
                Needs::Module => module.is_some(),
                Needs::Extension => {
                    matches!(module, Some(Module::Lattice(_)))
                        && res.numeric.as_ref().is_some_and(|n| n.betas.is_some())
                }
            };
            if !ok {
                let what = match t.needs() {
                    Needs::Module => "a module",
                    _ => "a lattice module and a delta",
                };
                return Err(cfg.invalid(format!("task {name} needs {what}")));
            }
        }
        Ok(())
    }
}

/// The Drinfeld module of a lattice.
pub struct DrinfeldData {
    pub periods: Vec<CInf>,
    pub kappa: Vec<CInf>,
    pub module: AnalyticModule,
    pub frames: FrameSet<CInf>,
}

pub struct Context {
    pub res: Resolved,
    drinfeld: OnceCell<Result<DrinfeldData, MathError>>,
    scenario: OnceCell<Result<Scenario, MathError>>,
    parts: OnceCell<Result<PipelineParts, MathError>>,
    third_kind: OnceCell<Result<ThirdKindReport, MathError>>,
}

impl Context {
    pub fn new(res: Resolved) -> Self {
        Context {
            res,
            drinfeld: OnceCell::new(),
            scenario: OnceCell::new(),
            parts: OnceCell::new(),
            third_kind: OnceCell::new(),
        }
    }

    /// Numeric settings; tasks with `Needs::Module` or stronger may rely on them.
    pub fn numeric(&self) -> &Numeric {
        self.res.numeric.as_ref().expect("checked by Registry::check")
    }

    pub fn lattice_basis(&self) -> Option<&[CInf]> {
        match self.numeric().module.as_ref()? {
            Module::Lattice(b) => Some(b),
            Module::Carlitz => None,
        }
    }

    pub fn drinfeld(&self) -> Result<&DrinfeldData, &MathError> {
        self.drinfeld
            .get_or_init(|| {
                let n = self.numeric();
                let basis = self.lattice_basis().ok_or_else(|| MathError::DimensionMismatch("no lattice".into()))?;
                let l = lattice_to_drinfeld(&LatticeDef { basis: basis.to_vec() }, n.work)?;
                let theta = CInf::theta(&n.field);
                let module = AnalyticModule::drinfeld(&theta, &l.kappa, n.work + 20);
                let frames = frame_matrices(&theta, &l.kappa)?;
                Ok(DrinfeldData { periods: basis.to_vec(), kappa: l.kappa, module, frames })
            })
            .as_ref()
    }

    pub fn scenario(&self) -> Result<&Scenario, &MathError> {
        self.scenario
            .get_or_init(|| {
                let n = self.numeric();
                let basis = self.lattice_basis().ok_or_else(|| MathError::DimensionMismatch("no lattice".into()))?;
                let betas = n.betas.clone().ok_or_else(|| MathError::DimensionMismatch("no delta".into()))?;
                Scenario::build(&ScenarioInput {
                    field: n.field.clone(),
                    basis: basis.to_vec(),
                    betas,
                    prec: n.prec,
                    guard: Some(n.guard),
                    work: n.work,
                    t_deg: n.t_deg,
                    max_scale: n.max_scale,
                })
            })
            .as_ref()
    }

    pub fn parts(&self) -> Result<&PipelineParts, &MathError> {
        self.parts.get_or_init(|| self.scenario().map_err(Clone::clone)?.trivialization()).as_ref()
    }

    pub fn third_kind(&self) -> Result<&ThirdKindReport, &MathError> {
        self.third_kind.get_or_init(|| self.scenario().map_err(Clone::clone)?.third_kind()).as_ref()
    }
}
