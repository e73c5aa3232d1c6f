//! A small shared-kitchen demo for option-based augmentation.
//!
//! The robot walks from `S` to `E`. Passing the fridge `M` uses up the milk;
//! passing the prep bench `D` leaves the counter dirty. Two anticipated tasks
//! of the next kitchen user need, respectively, milk and a clean counter.

use crate::gridworld::{Cell, Direction, GridLayout};
use crate::mdp::{StateId, TabularMdp};
use crate::options::{InitiationDistribution, InitiationSet};

pub const KITCHEN_LAYOUT: [&str; 2] = ["SMDE", "...."];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KitchenState {
    pub position: Cell,
    pub milk_left: bool,
    pub counter_clean: bool,
}

#[derive(Debug, Clone)]
pub struct KitchenDemo {
    pub mdp: TabularMdp,
    pub initiation: InitiationDistribution,
    cells: Vec<Cell>,
}

const WIDTH: usize = 4;
const HEIGHT: usize = 2;

fn glyph((r, c): Cell) -> u8 {
    KITCHEN_LAYOUT[r].as_bytes()[c]
}

fn neighbour((r, c): Cell, dir: Direction) -> Cell {
    let (r2, c2) = match dir {
        Direction::Up => (r.wrapping_sub(1), c),
        Direction::Down => (r + 1, c),
        Direction::Left => (r, c.wrapping_sub(1)),
        Direction::Right => (r, c + 1),
    };
    if r2 < HEIGHT && c2 < WIDTH && glyph((r2, c2)) != b'#' {
        (r2, c2)
    } else {
        (r, c)
    }
}

impl KitchenDemo {
    pub fn encode(&self, st: KitchenState) -> Option<StateId> {
        let i = self.cells.iter().position(|&c| c == st.position)?;
        Some(4 * i + 2 * st.milk_left as usize + st.counter_clean as usize)
    }

    pub fn decode(&self, s: StateId) -> Option<KitchenState> {
        let position = *self.cells.get(s / 4)?;
        Some(KitchenState {
            position,
            milk_left: s & 2 != 0,
            counter_clean: s & 1 != 0,
        })
    }

    pub fn terminal_state(&self, milk_left: bool, counter_clean: bool) -> StateId {
        self.encode(KitchenState {
            position: (0, 3),
            milk_left,
            counter_clean,
        })
        .unwrap()
    }
}

impl GridLayout for KitchenDemo {
    fn grid_rows(&self) -> Vec<String> {
        KITCHEN_LAYOUT.iter().map(|r| r.to_string()).collect()
    }

    fn position(&self, s: StateId) -> Cell {
        self.decode(s).map(|st| st.position).unwrap_or((0, 0))
    }

    fn flags(&self, s: StateId) -> Vec<(String, bool)> {
        let st = self.decode(s).unwrap();
        vec![
            ("milk_left".into(), st.milk_left),
            ("counter_clean".into(), st.counter_clean),
        ]
    }
}

/// Builds the kitchen MDP (step reward -1, undiscounted) and a uniform
/// distribution over the two tasks' initiation sets.
pub fn build_kitchen_options_demo() -> KitchenDemo {
    build_kitchen(-1.0, 1.0)
}

pub fn build_kitchen(step_reward: f64, gamma: f64) -> KitchenDemo {
    let cells: Vec<Cell> = (0..HEIGHT)
        .flat_map(|r| (0..WIDTH).map(move |c| (r, c)))
        .filter(|&c| glyph(c) != b'#')
        .collect();
    let mut demo = KitchenDemo {
        mdp: TabularMdp::new(cells.len() * 4, 4, gamma, 0),
        initiation: InitiationDistribution::uniform(vec![InitiationSet::new()]).unwrap(),
        cells,
    };
    let start = demo
        .encode(KitchenState {
            position: (0, 0),
            milk_left: true,
            counter_clean: true,
        })
        .unwrap();
    demo.mdp.set_initial_state(start);

    for s in 0..demo.mdp.num_states() {
        let st = demo.decode(s).unwrap();
        if glyph(st.position) == b'E' {
            demo.mdp.make_absorbing(s);
            continue;
        }
        for (a, dir) in Direction::ALL.into_iter().enumerate() {
            let to = neighbour(st.position, dir);
            let next = KitchenState {
                position: to,
                milk_left: st.milk_left && glyph(to) != b'M',
                counter_clean: st.counter_clean && glyph(to) != b'D',
            };
            demo.mdp
                .add_transition(s, a, demo.encode(next).unwrap(), 1.0, step_reward);
        }
    }

    let n = demo.mdp.num_states();
    let needs_milk = (0..n).filter(|&s| demo.decode(s).unwrap().milk_left).collect();
    let needs_clean = (0..n).filter(|&s| demo.decode(s).unwrap().counter_clean).collect();
    demo.initiation = InitiationDistribution::uniform(vec![needs_milk, needs_clean]).unwrap();
    demo
}
