//! The benchmark models, embedded so tests and tools agree on their text.

pub const COIN: &str = include_str!("../corpus/coin.ppl");
pub const GEOMETRIC: &str = include_str!("../corpus/geometric.ppl");
pub const SSM: &str = include_str!("../corpus/ssm.ppl");
pub const CRBD: &str = include_str!("../corpus/crbd.ppl");

/// `(name, source)` for every corpus model.
pub const ALL: [(&str, &str); 4] = [("coin", COIN), ("geometric", GEOMETRIC), ("ssm", SSM), ("crbd", CRBD)];
