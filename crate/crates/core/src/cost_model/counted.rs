use std::cell::RefCell;
use std::ops::{Add, Mul, Sub};

use crate::scalar::{Real, Work};

/// An `f64` that counts every arithmetic operation performed on it.
///
/// Tallies live in thread-local storage and are attributed to the [`Work`]
/// most recently announced through [`Real::attribute`]. Only meaningful under
/// serial execution.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Counted(pub f64);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCount {
    pub md: u64,
    pub adds: u64,
    pub lines: u64,
    pub line_len: usize,
}

/// Counts per component (indexed by `Component::index`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub update: [OpCount; 6],
    pub solve: [OpCount; 6],
    pub untracked: OpCount,
}

struct State {
    current: Work,
    tally: Tally,
}

thread_local! {
    static STATE: RefCell<State> = RefCell::new(State {
        current: Work::Untracked,
        tally: Tally::default(),
    });
}

fn with_current(f: impl FnOnce(&mut OpCount)) {
    STATE.with(|s| {
        let mut s = s.borrow_mut();
        let cur = s.current;
        let slot = match cur {
            Work::Update(c) => &mut s.tally.update[c.index()],
            Work::Solve(c) => &mut s.tally.solve[c.index()],
            Work::Untracked => &mut s.tally.untracked,
        };
        f(slot);
    });
}

/// Clear this thread's tallies.
pub(crate) fn reset() {
    STATE.with(|s| {
        let mut s = s.borrow_mut();
        s.current = Work::Untracked;
        s.tally = Tally::default();
    });
}

/// Take and clear this thread's tallies.
pub(crate) fn take() -> Tally {
    STATE.with(|s| {
        let mut s = s.borrow_mut();
        s.current = Work::Untracked;
        std::mem::take(&mut s.tally)
    })
}

impl Add for Counted {
    type Output = Counted;

    fn add(self, rhs: Counted) -> Counted {
        with_current(|c| c.adds += 1);
        Counted(self.0 + rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Counted {
    type Output = Counted;

    fn sub(self, rhs: Counted) -> Counted {
        with_current(|c| c.adds += 1);
        Counted(self.0 - rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Counted {
    type Output = Counted;

    fn mul(self, rhs: Counted) -> Counted {
        with_current(|c| c.md += 1);
        Counted(self.0 * rhs.0)
    }
}

impl Real for Counted {
    fn from_f64(v: f64) -> Self {
        Counted(v)
    }

    fn to_f64(self) -> f64 {
        self.0
    }

    fn attribute(work: Work) {
        STATE.with(|s| s.borrow_mut().current = work);
    }

    fn note_lines(lines: usize, len: usize) {
        with_current(|c| {
            c.lines += lines as u64;
            c.line_len = c.line_len.max(len);
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Component;

    #[test]
    fn counts_are_attributed() {
        reset();
        let (a, b) = (Counted(2.0), Counted(3.0));
        <Counted as Real>::attribute(Work::Update(Component::Ey));
        let c = a * b + a - b;
        <Counted as Real>::attribute(Work::Solve(Component::Ey));
        let _ = c * c;
        let t = take();
        assert_eq!(c, Counted(5.0));
        assert_eq!((t.update[1].md, t.update[1].adds), (1, 2));
        assert_eq!(t.solve[1].md, 1);
        assert_eq!(take(), Tally::default());
    }
}
