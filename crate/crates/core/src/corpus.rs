//! Bundled example contracts and their analysis presets.

pub struct CorpusEntry {
    /// `<family>-<variant>`, e.g. `rps-correct`.
    pub name: &'static str,
    pub source: &'static str,
    pub preset: Preset,
}

/// Analysis settings for one bundled contract.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub party: &'static str,
    pub k: usize,
    pub objective: &'static str,
    /// Range overrides for desk-scale runs; the declared-ranges run uses none.
    pub desk: &'static [(&'static str, i64, i64)],
    pub granularity: u64,
    pub max_iters: usize,
}

const RPS: Preset = Preset {
    party: "issuer",
    k: 2,
    objective: "payoff + 10*AliceWon",
    desk: &[("Bids", 0, 1), ("bid", 0, 1)],
    granularity: 2,
    max_iters: 40,
};

const AUCTION: Preset = Preset {
    party: "p",
    k: 1,
    objective: "payoff + (Winner==p)*HighestBid",
    desk: &[("Bids", 0, 5), ("HighestBid", 0, 5), ("bid", 0, 5)],
    granularity: 2,
    max_iters: 80,
};

// Ranges are already tiny; the first pass is at unit granularity.
const LOTTERY: Preset = Preset { party: "p", k: 3, objective: "payoff", desk: &[], granularity: 32, max_iters: 10 };

const SALE: Preset = Preset {
    party: "p",
    k: 1,
    objective: "balance[p]",
    desk: &[("balance", 0, 20), ("remaining", 0, 10), ("payment", 0, 20)],
    granularity: 2,
    max_iters: 80,
};

const TRANSFER: Preset = Preset {
    party: "p",
    k: 1,
    objective: "balance[p]",
    desk: &[("balance", 0, 4), ("remaining", 0, 2), ("payment", 0, 4), ("amount", 0, 4)],
    granularity: 2,
    max_iters: 80,
};

const TRANSFER_BUGGY: Preset = Preset {
    desk: &[
        ("balance", 0, 4),
        ("remaining", 0, 2),
        ("payment", 0, 4),
        ("amount", 0, 4),
        ("fromBalance", 0, 4),
        ("toBalance", 0, 4),
    ],
    ..TRANSFER
};

macro_rules! entry {
    ($name:literal, $preset:expr) => {
        CorpusEntry { name: $name, source: include_str!(concat!("../corpus/", $name, ".qsc")), preset: $preset }
    };
}

pub const CORPUS: &[CorpusEntry] = &[
    entry!("rps-correct", RPS),
    entry!("rps-buggy", RPS),
    entry!("auction-correct", AUCTION),
    entry!("auction-buggy", AUCTION),
    entry!("lottery-correct", LOTTERY),
    entry!("lottery-buggy", LOTTERY),
    entry!("sale-correct", SALE),
    entry!("sale-buggy", SALE),
    entry!("transfer-correct", TRANSFER),
    entry!("transfer-buggy", TRANSFER_BUGGY),
];

pub fn corpus_entry(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}

/// The five contract families, each as `(correct, buggy)`.
pub fn pairs() -> Vec<(&'static CorpusEntry, &'static CorpusEntry)> {
    CORPUS.chunks(2).map(|c| (&c[0], &c[1])).collect()
}
