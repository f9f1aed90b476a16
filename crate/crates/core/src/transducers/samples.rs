//! Small handcrafted machines used by tests, benchmarks and the CLI.

use super::{Action, Move, TapeSymbol, TwoWayTransducer};

const END: TapeSymbol = TapeSymbol::EndMarker;
const ZERO: TapeSymbol = TapeSymbol::Letter('0');
const ONE: TapeSymbol = TapeSymbol::Letter('1');

fn build(states: usize, outputs: &str, t: Vec<(usize, TapeSymbol, Action)>) -> TwoWayTransducer {
    TwoWayTransducer::new(states, 0, ['0', '1'], outputs.chars(), true, t)
        .expect("well-formed sample")
}

/// Copies `π`.
pub fn copier() -> TwoWayTransducer {
    build(
        2,
        "01",
        vec![
            (0, END, Action::new("", Move::Right, 1)),
            (1, ZERO, Action::new("0", Move::Right, 1)),
            (1, ONE, Action::new("1", Move::Right, 1)),
        ],
    )
}

/// On every `1` steps back into the previous block and returns, emitting
/// `x` and `y`. The step back reverses direction on `0`.
pub fn bounce() -> TwoWayTransducer {
    let (a, b, b2, b3, c) = (1, 2, 3, 4, 5);
    build(
        6,
        "01xy",
        vec![
            (0, END, Action::new("", Move::Right, a)),
            (a, ZERO, Action::new("0", Move::Right, a)),
            (a, ONE, Action::new("1", Move::Left, b)),
            (b, ZERO, Action::new("x", Move::Left, b2)),
            (b, END, Action::new("x", Move::Right, c)),
            (b, ONE, Action::new("x", Move::Right, c)),
            (b2, ZERO, Action::new("", Move::Right, b3)),
            (b2, ONE, Action::new("", Move::Right, b3)),
            (b2, END, Action::new("", Move::Right, b3)),
            (b3, ZERO, Action::new("", Move::Right, c)),
            (c, ONE, Action::new("y", Move::Right, a)),
        ],
    )
}

/// Crosses each block two steps forward and one back.
pub fn stutter() -> TwoWayTransducer {
    let (e, f, g) = (1, 2, 3);
    build(
        4,
        "01ab",
        vec![
            (0, END, Action::new("", Move::Right, e)),
            (e, ZERO, Action::new("a", Move::Right, f)),
            (f, ZERO, Action::new("", Move::Left, g)),
            (g, ZERO, Action::new("b", Move::Right, e)),
            (e, ONE, Action::new("1", Move::Right, e)),
            (f, ONE, Action::new("1", Move::Right, e)),
            (g, ONE, Action::new("1", Move::Right, e)),
        ],
    )
}

/// Crosses each block three times, and every other block is entered from
/// two blocks away: segments of the run span two blocks.
pub fn back_visit() -> TwoWayTransducer {
    let (a, b, c, d) = (1, 2, 3, 4);
    build(
        5,
        "01c",
        vec![
            (0, END, Action::new("", Move::Right, a)),
            (a, ZERO, Action::new("0", Move::Right, a)),
            (a, ONE, Action::new("1", Move::Right, b)),
            (b, ZERO, Action::new("", Move::Right, b)),
            (b, ONE, Action::new("", Move::Left, c)),
            (c, ZERO, Action::new("", Move::Left, c)),
            (c, ONE, Action::new("c", Move::Right, d)),
            (d, ZERO, Action::new("", Move::Right, d)),
            (d, ONE, Action::new("", Move::Right, a)),
        ],
    )
}

/// Prints the first letter, returns to `⊢` to print `#`, then copies.
pub fn endmarker_touch(letters: &[char]) -> TwoWayTransducer {
    let mut t = vec![
        (0, END, Action::new("", Move::Right, 1)),
        (2, END, Action::new("#", Move::Right, 3)),
    ];
    for &a in letters {
        let l = TapeSymbol::Letter(a);
        t.push((
            1,
            l,
            Action {
                output: vec![a],
                direction: Move::Left,
                to: 2,
            },
        ));
        t.push((
            3,
            l,
            Action {
                output: vec![a],
                direction: Move::Right,
                to: 3,
            },
        ));
    }
    let outputs = letters.iter().copied().chain(['#']);
    TwoWayTransducer::new(4, 0, letters.iter().copied(), outputs, true, t)
        .expect("well-formed sample")
}

/// Bounces between `⊢` and the first letter forever, printing it each time.
pub fn endmarker_bouncer(letters: &[char]) -> TwoWayTransducer {
    let mut t = vec![(0, END, Action::new("", Move::Right, 1))];
    for &a in letters {
        t.push((
            1,
            TapeSymbol::Letter(a),
            Action {
                output: vec![a],
                direction: Move::Left,
                to: 0,
            },
        ));
    }
    TwoWayTransducer::new(
        2,
        0,
        letters.iter().copied(),
        letters.iter().copied(),
        true,
        t,
    )
    .expect("well-formed sample")
}
