use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

use crate::kernel::Ident;

use super::{AbstractValue, AnalysisError, AnalysisResult, Constraint};

/// Worklist discipline. The fixpoint does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Lifo,
    Fifo,
}

pub fn solve(cs: &BTreeSet<Constraint>) -> Result<AnalysisResult, AnalysisError> {
    solve_with(cs, Order::Lifo)
}

pub fn solve_with(cs: &BTreeSet<Constraint>, order: Order) -> Result<AnalysisResult, AnalysisError> {
    let mut s = Solver::new(order);
    for c in cs {
        let c = s.intern_constraint(c);
        s.init(c);
    }
    s.run()?;
    Ok(s.result())
}

struct Interner<T> {
    items: Vec<T>,
    index: HashMap<T, usize>,
}

impl<T: Clone + Eq + Hash> Interner<T> {
    fn new() -> Self {
        Interner {
            items: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn get(&mut self, t: &T) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        let i = self.items.len();
        self.items.push(t.clone());
        self.index.insert(t.clone(), i);
        i
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Val {
    Lam { param: usize, ret: usize },
    Const { origin: usize, arity: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum C {
    Member(usize, usize),
    Subset(usize, usize),
    CondMember(usize, usize, usize, usize),
    Suspend(usize),
    SuspendImplies(usize, usize),
    AppFlow { lhs: usize, rhs: usize, app: usize },
    ConstArity { lhs: usize, app: usize },
    LamSuspendToResult { lhs: usize, res: usize },
    LamSuspendAll(usize),
    ConstSuspendToResult { lhs: usize, res: usize },
    ConstSuspendAll(usize),
    ResultSuspendsCallees { res: usize, lhs: usize },
}

struct Solver {
    order: Order,
    vars: Interner<Ident>,
    vals: Interner<Val>,
    cstrs: Interner<C>,
    data: Vec<BTreeSet<usize>>,
    suspend: Vec<bool>,
    edges: Vec<Vec<usize>>,
    worklist: VecDeque<usize>,
    pops: u64,
}

impl Solver {
    fn new(order: Order) -> Self {
        Solver {
            order,
            vars: Interner::new(),
            vals: Interner::new(),
            cstrs: Interner::new(),
            data: Vec::new(),
            suspend: Vec::new(),
            edges: Vec::new(),
            worklist: VecDeque::new(),
            pops: 0,
        }
    }

    fn var(&mut self, x: &Ident) -> usize {
        let i = self.vars.get(x);
        if i == self.data.len() {
            self.data.push(BTreeSet::new());
            self.suspend.push(false);
            self.edges.push(Vec::new());
        }
        i
    }

    fn val(&mut self, a: &AbstractValue) -> usize {
        let v = match a {
            AbstractValue::Lam { param, ret } => Val::Lam {
                param: self.var(param),
                ret: self.var(ret),
            },
            AbstractValue::Const { origin, arity } => Val::Const {
                origin: self.var(origin),
                arity: *arity,
            },
        };
        self.vals.get(&v)
    }

    fn intern_constraint(&mut self, c: &Constraint) -> C {
        match c {
            Constraint::Member { value, set } => C::Member(self.val(value), self.var(set)),
            Constraint::Subset { from, to } => C::Subset(self.var(from), self.var(to)),
            Constraint::CondMember {
                trigger,
                watch,
                value,
                set,
            } => C::CondMember(self.val(trigger), self.var(watch), self.val(value), self.var(set)),
            Constraint::Suspend(x) => C::Suspend(self.var(x)),
            Constraint::SuspendImplies { from, to } => C::SuspendImplies(self.var(from), self.var(to)),
            Constraint::AppFlow { lhs, rhs, app } => C::AppFlow {
                lhs: self.var(lhs),
                rhs: self.var(rhs),
                app: self.var(app),
            },
            Constraint::ConstArity { lhs, app } => C::ConstArity {
                lhs: self.var(lhs),
                app: self.var(app),
            },
            Constraint::LamSuspendToResult { lhs, res } => C::LamSuspendToResult {
                lhs: self.var(lhs),
                res: self.var(res),
            },
            Constraint::LamSuspendAll { lhs } => C::LamSuspendAll(self.var(lhs)),
            Constraint::ConstSuspendToResult { lhs, res } => C::ConstSuspendToResult {
                lhs: self.var(lhs),
                res: self.var(res),
            },
            Constraint::ConstSuspendAll { lhs } => C::ConstSuspendAll(self.var(lhs)),
            Constraint::ResultSuspendsCallees { res, lhs } => C::ResultSuspendsCallees {
                res: self.var(res),
                lhs: self.var(lhs),
            },
        }
    }

    fn push(&mut self, x: usize) {
        match self.order {
            Order::Lifo => self.worklist.push_front(x),
            Order::Fifo => self.worklist.push_back(x),
        }
    }

    fn add_data(&mut self, x: usize, vals: &[usize]) {
        let mut grew = false;
        for &v in vals {
            grew |= self.data[x].insert(v);
        }
        if grew {
            self.push(x);
        }
    }

    fn add_suspend(&mut self, x: usize) {
        if !self.suspend[x] {
            self.suspend[x] = true;
            self.push(x);
        }
    }

    /// Registers `c` on the variable it watches and propagates it once.
    /// Registering a constraint a second time only re-propagates it.
    fn init(&mut self, c: C) {
        let before = self.cstrs.items.len();
        let id = self.cstrs.get(&c);
        let fresh = id == before;
        let watch = match c {
            C::Member(a, x) => {
                self.add_data(x, &[a]);
                return;
            }
            C::Suspend(x) => {
                self.add_suspend(x);
                return;
            }
            C::Subset(x, _) | C::CondMember(_, x, _, _) | C::SuspendImplies(x, _) => x,
            C::AppFlow { lhs, .. }
            | C::ConstArity { lhs, .. }
            | C::LamSuspendToResult { lhs, .. }
            | C::LamSuspendAll(lhs)
            | C::ConstSuspendToResult { lhs, .. }
            | C::ConstSuspendAll(lhs) => lhs,
            C::ResultSuspendsCallees { res, .. } => res,
        };
        if fresh {
            self.edges[watch].push(id);
        }
        self.propagate(c);
    }

    fn lams(&self, lhs: usize) -> Vec<(usize, usize)> {
        self.data[lhs]
            .iter()
            .filter_map(|&v| match self.vals.items[v] {
                Val::Lam { param, ret } => Some((param, ret)),
                _ => None,
            })
            .collect()
    }

    fn consts(&self, lhs: usize) -> Vec<(usize, usize)> {
        self.data[lhs]
            .iter()
            .filter_map(|&v| match self.vals.items[v] {
                Val::Const { origin, arity } => Some((origin, arity)),
                _ => None,
            })
            .collect()
    }

    fn propagate(&mut self, c: C) {
        match c {
            C::Member(..) | C::Suspend(_) => {}
            C::Subset(x, y) => {
                let vals: Vec<usize> = self.data[x].iter().copied().collect();
                self.add_data(y, &vals);
            }
            C::CondMember(a1, x, a2, y) => {
                if self.data[x].contains(&a1) {
                    self.add_data(y, &[a2]);
                }
            }
            C::SuspendImplies(x, y) => {
                if self.suspend[x] {
                    self.add_suspend(y);
                }
            }
            C::AppFlow { lhs, rhs, app } => {
                for (z, y) in self.lams(lhs) {
                    self.init(C::Subset(rhs, z));
                    self.init(C::Subset(y, app));
                }
            }
            C::ConstArity { lhs, app } => {
                for (y, n) in self.consts(lhs) {
                    if n > 1 {
                        let v = self.vals.get(&Val::Const {
                            origin: y,
                            arity: n - 1,
                        });
                        self.add_data(app, &[v]);
                    }
                }
            }
            C::LamSuspendToResult { lhs, res } => {
                for (y, _) in self.lams(lhs) {
                    self.init(C::SuspendImplies(y, res));
                }
            }
            C::LamSuspendAll(lhs) => {
                for (y, _) in self.lams(lhs) {
                    self.add_suspend(y);
                }
            }
            C::ConstSuspendToResult { lhs, res } => {
                for (y, _) in self.consts(lhs) {
                    self.init(C::SuspendImplies(y, res));
                }
            }
            C::ConstSuspendAll(lhs) => {
                for (y, _) in self.consts(lhs) {
                    self.add_suspend(y);
                }
            }
            C::ResultSuspendsCallees { res, lhs } => {
                if self.suspend[res] {
                    self.init(C::LamSuspendAll(lhs));
                    self.init(C::ConstSuspendAll(lhs));
                }
            }
        }
    }

    fn run(&mut self) -> Result<(), AnalysisError> {
        while let Some(x) = self.worklist.pop_front() {
            self.pops += 1;
            // each push records a new fact about some variable, and each
            // variable gains at most one fact per abstract value plus its flag
            let bound = self.data.len() as u64 * (self.vals.items.len() as u64 + 1);
            if self.pops > bound {
                return Err(AnalysisError::WorkBound { pops: self.pops, bound });
            }
            let mut i = 0;
            while i < self.edges[x].len() {
                let c = self.cstrs.items[self.edges[x][i]];
                self.propagate(c);
                i += 1;
            }
        }
        Ok(())
    }

    fn result(&self) -> AnalysisResult {
        let abs = |v: usize| match self.vals.items[v] {
            Val::Lam { param, ret } => AbstractValue::Lam {
                param: self.vars.items[param].clone(),
                ret: self.vars.items[ret].clone(),
            },
            Val::Const { origin, arity } => AbstractValue::Const {
                origin: self.vars.items[origin].clone(),
                arity,
            },
        };
        let mut data = BTreeMap::new();
        for (i, set) in self.data.iter().enumerate() {
            if !set.is_empty() {
                data.insert(self.vars.items[i].clone(), set.iter().map(|&v| abs(v)).collect());
            }
        }
        let suspend = (0..self.suspend.len())
            .filter(|&i| self.suspend[i])
            .map(|i| self.vars.items[i].clone())
            .collect();
        AnalysisResult { data, suspend }
    }
}
