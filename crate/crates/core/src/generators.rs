//! Instance generators: planted covers with a known certificate and the
//! lower-bound families (upper-triangular, recursive halving, binomial
//! r-subsets, batched products).
//!
//! Every generator is a pure function of its parameters and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::instance::{BatchedInstance, SetSystem};
use crate::io::AnyInstance;
use crate::learn_or_cover::binomial;
use crate::rng::{tags, RngStream};

/// Largest set count any generator will materialize.
pub const DEFAULT_SET_CAP: u128 = 2_000_000;
/// Largest total membership (sum of set sizes) any generator will build.
pub const DEFAULT_MEMBERSHIP_CAP: u128 = 50_000_000;

fn generator_rng(seed: u64) -> RngStream {
    RngStream::new(seed).derive(tags::GENERATOR)
}

/// Ordered `key=value` metadata written next to generated instances.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Meta {
    entries: Vec<(String, String)>,
}

impl Meta {
    pub fn new(family: &str) -> Self {
        let mut m = Self::default();
        m.push("family", family);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = Self::default();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(idx + 1, "expected key=value"))?;
            meta.push(k.trim(), v.trim());
        }
        Ok(meta)
    }

    /// The certified cover or optimum, if the generator knows one.
    pub fn opt_upper_bound(&self) -> Option<f64> {
        self.get("opt_cost").or_else(|| self.get("planted_cost")).and_then(|v| v.parse().ok())
    }

    /// Zero-based ids of the optimal or planted cover.
    pub fn reference_cover(&self) -> Option<Vec<usize>> {
        let ids = self.get("opt_cover").or_else(|| self.get("planted_cover"))?;
        ids.split_whitespace().map(|t| t.parse::<usize>().ok().filter(|&i| i > 0).map(|i| i - 1)).collect()
    }
}

/// `foo.txt` → `foo.meta`.
pub fn meta_path(instance_path: &Path) -> PathBuf {
    instance_path.with_extension("meta")
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub sys: SetSystem,
    /// Planted set ids, ascending.
    pub cover: Vec<usize>,
    pub cover_cost: f64,
}

/// `k` planted sets partition `[n]` into blocks whose sizes differ by at most
/// one; every other set contains each element independently with
/// probability `p_extra`. Costs are 1, or uniform in `[1, 1 + cost_jitter)`.
pub fn gen_planted(n: usize, m: usize, k: usize, p_extra: f64, cost_jitter: f64, seed: u64) -> Result<Planted> {
    if k == 0 || k > m || k > n {
        return Err(Error::InvalidParams(format!("planted cover needs 1 <= k <= min(n, m); got n={n} m={m} k={k}")));
    }
    if !(0.0..=1.0).contains(&p_extra) {
        return Err(Error::InvalidProbability(p_extra));
    }
    if !(cost_jitter >= 0.0 && cost_jitter.is_finite()) {
        return Err(Error::InvalidParams(format!("cost jitter must be finite and nonnegative, got {cost_jitter}")));
    }
    let mut rng = generator_rng(seed);
    let mut elements: Vec<usize> = (0..n).collect();
    rng.shuffle_slice(&mut elements);
    let mut ids: Vec<usize> = (0..m).collect();
    rng.shuffle_slice(&mut ids);
    let planted_ids = &ids[..k];
    let mut members = vec![Vec::new(); m];
    for (pos, &e) in elements.iter().enumerate() {
        members[planted_ids[pos % k]].push(e);
    }
    let mut is_planted = vec![false; m];
    for &j in planted_ids {
        is_planted[j] = true;
    }
    for j in 0..m {
        if is_planted[j] {
            members[j].sort_unstable();
        } else {
            members[j] = (0..n).filter(|_| rng.coin(p_extra)).collect();
        }
    }
    let costs: Vec<f64> =
        (0..m).map(|_| if cost_jitter > 0.0 { 1.0 + cost_jitter * rng.uniform() } else { 1.0 }).collect();
    let mut cover = planted_ids.to_vec();
    cover.sort_unstable();
    let sys = SetSystem::new(n, members, costs)?;
    let cover_cost = sys.cover_cost(&cover);
    Ok(Planted { sys, cover, cover_cost })
}

/// Set `π(i)` is `{n-i+1, ..., n}` (1-based) for a permutation `π` of the set
/// labels. The set with label `π(n)` is the whole ground set.
pub fn upper_triangular_with(perm: &[usize]) -> Result<SetSystem> {
    let n = perm.len();
    let mut members = vec![Vec::new(); n];
    for (i, &label) in perm.iter().enumerate() {
        // 0-based i ↔ 1-based i+1: elements n-(i+1) .. n-1
        members[label] = (n - 1 - i..n).collect();
    }
    SetSystem::unit_cost(n, members)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    pub sys: SetSystem,
    /// Id of the set covering everything.
    pub full_set: usize,
}

pub fn gen_upper_triangular(n: usize, seed: u64) -> Result<UpperTriangular> {
    if n == 0 {
        return Err(Error::InvalidParams("upper-triangular instance needs n >= 1".into()));
    }
    let perm = generator_rng(seed).shuffle(n);
    let sys = upper_triangular_with(perm.as_slice())?;
    Ok(UpperTriangular { sys, full_set: perm.as_slice()[n - 1] })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recursive {
    pub sys: SetSystem,
    /// Level `i ∈ 1..=ℓ` at which each element was added.
    pub types: Vec<usize>,
    /// The single set surviving every halving; it covers everything.
    pub full_set: usize,
}

/// Start with `2^ℓ` sets. In round `i`, add `2^(ℓ-i)` fresh elements to every
/// surviving set, then keep a uniformly random half of the survivors.
pub fn gen_recursive(levels: usize, seed: u64) -> Result<Recursive> {
    if levels == 0 || levels > 24 {
        return Err(Error::InvalidParams(format!("recursive instance needs 1 <= levels <= 24, got {levels}")));
    }
    let m = 1usize << levels;
    let mut rng = generator_rng(seed);
    let mut members = vec![Vec::new(); m];
    let mut types = Vec::with_capacity(m - 1);
    let mut alive: Vec<usize> = (0..m).collect();
    for i in 1..=levels {
        for _ in 0..1usize << (levels - i) {
            let e = types.len();
            types.push(i);
            for &s in &alive {
                members[s].push(e);
            }
        }
        rng.shuffle_slice(&mut alive);
        alive.truncate(alive.len() / 2);
        alive.sort_unstable();
    }
    let sys = SetSystem::unit_cost(types.len(), members)?;
    Ok(Recursive { sys, types, full_set: alive[0] })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binomial {
    pub sys: SetSystem,
    /// The realized universe as labels in `[10r²]`, ascending.
    pub universe: Vec<usize>,
    pub ground: usize,
    /// Id of the r-subset equal to the universe.
    pub full_set: usize,
}

/// All r-subsets of `[10r²]` as sets, restricted to a uniformly random
/// r-subset that serves as the universe.
pub fn gen_binomial(r: usize, seed: u64, cap: u128) -> Result<Binomial> {
    if r == 0 {
        return Err(Error::InvalidParams("binomial instance needs r >= 1".into()));
    }
    let ground = 10 * r * r;
    let m = binomial(ground, r).unwrap_or(u128::MAX);
    if m > cap {
        return Err(Error::CapExceeded { what: "binomial set count", size: m, cap });
    }
    let mut rng = generator_rng(seed);
    let mut labels: Vec<usize> = (0..ground).collect();
    rng.shuffle_slice(&mut labels);
    let mut universe = labels[..r].to_vec();
    universe.sort_unstable();
    let mut local = vec![usize::MAX; ground];
    for (i, &u) in universe.iter().enumerate() {
        local[u] = i;
    }
    let mut members = Vec::with_capacity(m as usize);
    let mut full_set = 0;
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        let set: Vec<usize> = idx.iter().filter(|&&g| local[g] != usize::MAX).map(|&g| local[g]).collect();
        if set.len() == r {
            full_set = members.len();
        }
        members.push(set);
        let Some(i) = (0..r).rev().find(|&i| idx[i] < ground - r + i) else { break };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
    let sys = SetSystem::unit_cost(r, members)?;
    Ok(Binomial { sys, universe, ground, full_set })
}

/// Batched product of the upper-triangular instance on `big_n` elements with
/// `h`. Element `(i, j)` has id `i·N' + j`, set `(a, b)` has id `a·M' + b`
/// and cost `c_b`; batch `i` is `{(i, j) : j ∈ [N']}`.
pub fn gen_product_batched(big_n: usize, h: &SetSystem, seed: u64) -> Result<BatchedInstance> {
    let delta = gen_upper_triangular(big_n, seed)?.sys;
    let (n1, m1) = (h.n(), h.m());
    let elements = (big_n as u128) * n1 as u128;
    let sets = (big_n as u128) * m1 as u128;
    if sets > DEFAULT_SET_CAP {
        return Err(Error::CapExceeded { what: "product set count", size: sets, cap: DEFAULT_SET_CAP });
    }
    let membership: u128 =
        (big_n as u128 * (big_n as u128 + 1) / 2) * h.members().iter().map(|s| s.len() as u128).sum::<u128>();
    if membership > DEFAULT_MEMBERSHIP_CAP {
        return Err(Error::CapExceeded { what: "product membership", size: membership, cap: DEFAULT_MEMBERSHIP_CAP });
    }
    let mut members = Vec::with_capacity(sets as usize);
    let mut costs = Vec::with_capacity(sets as usize);
    for a in 0..big_n {
        for b in 0..m1 {
            let mut set = Vec::with_capacity(delta.set(a).len() * h.set(b).len());
            for &i in delta.set(a) {
                for &j in h.set(b) {
                    set.push(i * n1 + j);
                }
            }
            members.push(set);
            costs.push(h.cost(b));
        }
    }
    let base = SetSystem::new(elements as usize, members, costs)?;
    let batches = (0..big_n).map(|i| (i * n1..(i + 1) * n1).collect()).collect();
    BatchedInstance::new(base, batches)
}

/// Family and parameters of a generated instance.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Planted {
        n: usize,
        m: usize,
        k: usize,
        p_extra: f64,
        cost_jitter: f64,
    },
    UpperTriangular {
        n: usize,
    },
    Recursive {
        levels: usize,
    },
    Binomial {
        r: usize,
    },
    /// Product of an upper-triangular instance on `big_n` elements with a
    /// planted instance `H`.
    ProductBatched {
        big_n: usize,
        h_n: usize,
        h_m: usize,
        h_k: usize,
        h_p_extra: f64,
    },
}

impl GeneratorSpec {
    pub fn family(&self) -> &'static str {
        match self {
            GeneratorSpec::Planted { .. } => "planted",
            GeneratorSpec::UpperTriangular { .. } => "upper-triangular",
            GeneratorSpec::Recursive { .. } => "recursive",
            GeneratorSpec::Binomial { .. } => "binomial",
            GeneratorSpec::ProductBatched { .. } => "product-batched",
        }
    }

    /// Builds a spec from a family name and `key=value` parameters.
    /// Missing keys fall back to family defaults where one exists.
    pub fn from_params(family: &str, params: &[(String, String)]) -> Result<Self> {
        let get = |key: &str| params.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let usize_of = |key: &str, default: Option<usize>| -> Result<usize> {
            match get(key) {
                Some(v) => v.parse().map_err(|_| Error::InvalidParams(format!("{key}={v} is not an integer"))),
                None => default.ok_or_else(|| Error::InvalidParams(format!("{family} requires {key}"))),
            }
        };
        let f64_of = |key: &str, default: f64| -> Result<f64> {
            match get(key) {
                Some(v) => v.parse().map_err(|_| Error::InvalidParams(format!("{key}={v} is not a number"))),
                None => Ok(default),
            }
        };
        Ok(match family {
            "planted" => {
                let n = usize_of("n", None)?;
                let m = usize_of("m", Some(n))?;
                let k = usize_of("k", None)?;
                GeneratorSpec::Planted {
                    n,
                    m,
                    k,
                    p_extra: f64_of("p_extra", 1.0 / k.max(1) as f64)?,
                    cost_jitter: f64_of("cost_jitter", 0.0)?,
                }
            }
            "upper-triangular" => GeneratorSpec::UpperTriangular { n: usize_of("n", None)? },
            "recursive" => GeneratorSpec::Recursive { levels: usize_of("levels", None)? },
            "binomial" => GeneratorSpec::Binomial { r: usize_of("r", None)? },
            "product-batched" => {
                let h_k = usize_of("h_k", Some(4))?;
                GeneratorSpec::ProductBatched {
                    big_n: usize_of("n", None)?,
                    h_n: usize_of("h_n", Some(12))?,
                    h_m: usize_of("h_m", Some(8))?,
                    h_k,
                    h_p_extra: f64_of("h_p_extra", 0.3)?,
                }
            }
            other => return Err(Error::InvalidParams(format!("unknown family '{other}'"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: AnyInstance,
    pub meta: Meta,
}

impl Generated {
    pub fn set_system(&self) -> &SetSystem {
        match &self.instance {
            AnyInstance::SetCover(s) => s,
            AnyInstance::Batched(b) => b.base(),
            AnyInstance::Cip(_) => unreachable!("generators only build set systems"),
        }
    }
}

pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Generated> {
    let mut meta = Meta::new(spec.family());
    let instance = match *spec {
        GeneratorSpec::Planted { n, m, k, p_extra, cost_jitter } => {
            let p = gen_planted(n, m, k, p_extra, cost_jitter, seed)?;
            meta.push("n", n);
            meta.push("m", m);
            meta.push("k", k);
            meta.push("p_extra", p_extra);
            meta.push("cost_jitter", cost_jitter);
            meta.push("seed", seed);
            meta.push("planted_cover", join_ids(&p.cover));
            meta.push("planted_cost", p.cover_cost);
            AnyInstance::SetCover(p.sys)
        }
        GeneratorSpec::UpperTriangular { n } => {
            let ut = gen_upper_triangular(n, seed)?;
            meta.push("n", n);
            meta.push("m", n);
            meta.push("seed", seed);
            meta.push("opt_cover", join_ids(&[ut.full_set]));
            meta.push("opt_cost", 1);
            AnyInstance::SetCover(ut.sys)
        }
        GeneratorSpec::Recursive { levels } => {
            let rec = gen_recursive(levels, seed)?;
            meta.push("levels", levels);
            meta.push("n", rec.sys.n());
            meta.push("m", rec.sys.m());
            meta.push("seed", seed);
            meta.push("types", rec.types.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "));
            meta.push("opt_cover", join_ids(&[rec.full_set]));
            meta.push("opt_cost", 1);
            AnyInstance::SetCover(rec.sys)
        }
        GeneratorSpec::Binomial { r } => {
            let b = gen_binomial(r, seed, DEFAULT_SET_CAP)?;
            meta.push("r", r);
            meta.push("ground", b.ground);
            meta.push("n", b.sys.n());
            meta.push("m", b.sys.m());
            meta.push("seed", seed);
            meta.push("universe", join_ids(&b.universe));
            meta.push("opt_cover", join_ids(&[b.full_set]));
            meta.push("opt_cost", 1);
            AnyInstance::SetCover(b.sys)
        }
        GeneratorSpec::ProductBatched { big_n, h_n, h_m, h_k, h_p_extra } => {
            let h = gen_planted(h_n, h_m, h_k, h_p_extra, 0.0, seed)?;
            let inst = gen_product_batched(big_n, &h.sys, seed)?;
            meta.push("n_batches", big_n);
            meta.push("h_n", h_n);
            meta.push("h_m", h_m);
            meta.push("h_k", h_k);
            meta.push("h_p_extra", h_p_extra);
            meta.push("n", inst.base().n());
            meta.push("m", inst.base().m());
            meta.push("seed", seed);
            meta.push("h_planted_cost", h.cover_cost);
            meta.push("planted_cost", h.cover_cost);
            AnyInstance::Batched(inst)
        }
    };
    Ok(Generated { instance, meta })
}
