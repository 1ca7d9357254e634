use super::{Action, State, StateSpace};
use crate::scalar::Scalar;

/// Q-values for every (lattice state, action) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable<T> {
    space: StateSpace<T>,
    values: Vec<[T; 3]>,
}

impl<T: Scalar> QTable<T> {
    pub fn zeros(space: StateSpace<T>) -> Self {
        Self { values: vec![[T::zero(); 3]; space.len()], space }
    }

    pub fn space(&self) -> &StateSpace<T> {
        &self.space
    }

    #[inline]
    pub fn row(&self, s: State) -> [T; 3] {
        self.values[self.space.index(s)]
    }

    #[inline]
    pub fn get(&self, s: State, a: Action) -> T {
        self.values[self.space.index(s)][a.index()]
    }

    #[inline]
    pub fn set(&mut self, s: State, a: Action, v: T) {
        let i = self.space.index(s);
        self.values[i][a.index()] = v;
    }

    #[inline]
    pub fn max_value(&self, s: State) -> T {
        let r = self.row(s);
        r[0].max(r[1]).max(r[2])
    }

    /// Rows in ascending state order.
    pub fn rows(&self) -> impl Iterator<Item = (State, [T; 3])> + '_ {
        self.values.iter().enumerate().map(|(i, r)| (self.space.state_at(i), *r))
    }

    pub fn min_max(&self) -> (T, T) {
        self.values.iter().flatten().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    /// Element-wise mean of several tables over the same lattice.
    pub fn mean_of(tables: &[QTable<T>]) -> Option<QTable<T>> {
        let first = tables.first()?;
        let n = T::lit(tables.len() as f64);
        let mut out = QTable::zeros(first.space);
        for t in tables {
            for (acc, row) in out.values.iter_mut().zip(&t.values) {
                for k in 0..3 {
                    acc[k] = acc[k] + row[k];
                }
            }
        }
        out.values.iter_mut().flatten().for_each(|v| *v = *v / n);
        Some(out)
    }

    pub fn from_rows(space: StateSpace<T>, values: Vec<[T; 3]>) -> Option<Self> {
        (values.len() == space.len()).then_some(Self { space, values })
    }
}

/// One temporal-difference step on `Q(s, a)`:
/// `Q += epsilon * (r + gamma_eff * max_a' Q(s_next, a') - Q)`.
/// Returns the new value.
pub fn td_update<T: Scalar>(
    q: &mut QTable<T>,
    s: State,
    a: Action,
    r: T,
    s_next: State,
    epsilon: T,
    gamma_eff: T,
) -> T {
    let old = q.get(s, a);
    let bootstrap = if gamma_eff == T::zero() { T::zero() } else { gamma_eff * q.max_value(s_next) };
    let new = old + epsilon * (r + bootstrap - old);
    q.set(s, a, new);
    new
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> QTable<f64> {
        QTable::zeros(StateSpace::new(10.0, 1.0).unwrap())
    }

    #[test]
    fn terminal_update_example() {
        let mut q = table();
        td_update(&mut q, State(0), Action::Right, 20.0, State(0), 0.1, 0.0);
        assert_eq!(q.get(State(0), Action::Right), 2.0);
    }

    #[test]
    fn wait_update_example() {
        let mut q = table();
        td_update(&mut q, State(0), Action::Wait, -1.0, State(1), 0.1, 0.9);
        assert!((q.get(State(0), Action::Wait) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn full_replacement_with_unit_rate() {
        let mut q = table();
        q.set(State(2), Action::Left, 7.5);
        td_update(&mut q, State(2), Action::Left, -50.0, State(3), 1.0, 0.0);
        assert_eq!(q.get(State(2), Action::Left), -50.0);
    }

    #[test]
    fn bootstraps_from_next_state_max() {
        let mut q = table();
        q.set(State(1), Action::Right, 10.0);
        td_update(&mut q, State(0), Action::Wait, -1.0, State(1), 0.5, 0.9);
        assert!((q.get(State(0), Action::Wait) - 0.5 * (-1.0 + 9.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_freezes() {
        let mut q = table();
        q.set(State(0), Action::Wait, 3.0);
        let before = q.clone();
        td_update(&mut q, State(0), Action::Wait, -1.0, State(1), 0.0, 0.9);
        assert_eq!(q, before);
    }

    proptest! {
        #[test]
        fn changes_exactly_one_entry(
            s in -10i64..=10, next in -10i64..=10, a in 0usize..3,
            r in -100.0f64..100.0, eps in 0.01f64..1.0, g in 0.0f64..1.0,
            seed in proptest::collection::vec(-50.0f64..50.0, 63),
        ) {
            let sp = StateSpace::new(10.0, 1.0).unwrap();
            let rows: Vec<[f64; 3]> = seed.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            let mut q = QTable::from_rows(sp, rows).unwrap();
            let before = q.clone();
            let action = Action::ALL[a];
            td_update(&mut q, State(s), action, r, State(next), eps, g);
            let mut changed = 0;
            for ((st, r0), (_, r1)) in before.rows().zip(q.rows()) {
                for k in 0..3 {
                    if r0[k] != r1[k] {
                        changed += 1;
                        prop_assert_eq!(st, State(s));
                        prop_assert_eq!(k, action.index());
                    }
                }
            }
            prop_assert!(changed <= 1);
        }
    }
}
