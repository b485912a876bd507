//! Cooperating Networks Table: which remote gateways to listen to, how much
//! to trust them, and the latest values they reported.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use thiserror::Error;

use crate::geo::haversine_distance;
use crate::overlay::{GlobalLookupTable, GltEntry, NetworkCategory, NodeId};
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("d_max_km must be positive, got {0}")]
    MaxDistance(f64),
    #[error("trust_max must be positive, got {0}")]
    TrustMax(f64),
    #[error("correlation_threshold must lie in (0, 1), got {0}")]
    Threshold(f64),
    #[error("trust_bonus must be positive, got {0}")]
    TrustBonus(f64),
    #[error("min_history must be at least 3, got {0}")]
    MinHistory(usize),
    #[error("history_capacity {capacity} is smaller than min_history {min_history}")]
    HistoryCapacity { capacity: usize, min_history: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("distance {distance_km} km exceeds the cooperation range of {d_max_km} km")]
pub struct OutOfRange {
    pub distance_km: f64,
    pub d_max_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CorrelationError {
    #[error("at least 3 pairs are needed, got {0}")]
    InsufficientHistory(usize),
    #[error("correlation undefined for a constant series")]
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationSign {
    #[default]
    Positive,
    Negative,
}

impl CorrelationSign {
    fn matches(self, r: f64) -> bool {
        match self {
            CorrelationSign::Positive => r > 0.0,
            CorrelationSign::Negative => r < 0.0,
        }
    }
}

/// Per-network rules for selecting and trusting cooperation partners.
#[derive(Debug, Clone, PartialEq)]
pub struct CooperationPolicy {
    pub d_max_km: f64,
    pub compatible_categories: BTreeSet<NetworkCategory>,
    pub trust_max: f64,
    pub correlation_threshold: f64,
    /// Expected correlation sign per remote category; positive when absent.
    pub expected_sign: BTreeMap<NetworkCategory, CorrelationSign>,
    pub trust_bonus: f64,
    pub min_history: usize,
    pub history_capacity: usize,
}

impl CooperationPolicy {
    pub const DEFAULT_TRUST_MAX: f64 = 10.0;
    pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.7;
    pub const DEFAULT_TRUST_BONUS: f64 = 0.5;
    pub const DEFAULT_MIN_HISTORY: usize = 10;
    pub const DEFAULT_HISTORY_CAPACITY: usize = 256;

    pub fn new(d_max_km: f64, compatible: impl IntoIterator<Item = NetworkCategory>) -> Self {
        Self {
            d_max_km,
            compatible_categories: compatible.into_iter().collect(),
            trust_max: Self::DEFAULT_TRUST_MAX,
            correlation_threshold: Self::DEFAULT_CORRELATION_THRESHOLD,
            expected_sign: BTreeMap::new(),
            trust_bonus: Self::DEFAULT_TRUST_BONUS,
            min_history: Self::DEFAULT_MIN_HISTORY,
            history_capacity: Self::DEFAULT_HISTORY_CAPACITY,
        }
    }

    pub fn with_sign(mut self, category: NetworkCategory, sign: CorrelationSign) -> Self {
        self.expected_sign.insert(category, sign);
        self
    }

    pub fn sign_for(&self, category: &NetworkCategory) -> CorrelationSign {
        self.expected_sign.get(category).copied().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if !(self.d_max_km > 0.0) {
            return Err(PolicyError::MaxDistance(self.d_max_km));
        }
        if !(self.trust_max > 0.0) {
            return Err(PolicyError::TrustMax(self.trust_max));
        }
        if !(self.correlation_threshold > 0.0 && self.correlation_threshold < 1.0) {
            return Err(PolicyError::Threshold(self.correlation_threshold));
        }
        if !(self.trust_bonus > 0.0) {
            return Err(PolicyError::TrustBonus(self.trust_bonus));
        }
        if self.min_history < 3 {
            return Err(PolicyError::MinHistory(self.min_history));
        }
        if self.history_capacity < self.min_history {
            return Err(PolicyError::HistoryCapacity {
                capacity: self.history_capacity,
                min_history: self.min_history,
            });
        }
        Ok(())
    }
}

/// Proximity-based starting trust: `trust_max` at distance 0 falling
/// linearly to 0 at `d_max_km`.
pub fn initial_trust(distance_km: f64, policy: &CooperationPolicy) -> Result<f64, OutOfRange> {
    if distance_km > policy.d_max_km {
        return Err(OutOfRange { distance_km, d_max_km: policy.d_max_km });
    }
    let d = distance_km.max(0.0);
    Ok(policy.trust_max * (1.0 - d / policy.d_max_km))
}

/// Pearson correlation in the single-pass sum form.
///
/// Values are shifted by the first pair before summing. The coefficient is
/// shift invariant, and the shift keeps the sums well conditioned for
/// series with a large offset.
pub fn pearson_correlation<I>(pairs: I) -> Result<f64, CorrelationError>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut iter = pairs.into_iter();
    let Some((x0, y0)) = iter.next() else {
        return Err(CorrelationError::InsufficientHistory(0));
    };
    let (mut n, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (1usize, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in iter {
        let (x, y) = (x - x0, y - y0);
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    if n < 3 {
        return Err(CorrelationError::InsufficientHistory(n));
    }
    let nf = n as f64;
    let var_x = nf * sxx - sx * sx;
    let var_y = nf * syy - sy * sy;
    if !(var_x > 0.0 && var_y > 0.0) {
        return Err(CorrelationError::Undefined);
    }
    let r = (nf * sxy - sx * sy) / (libm::sqrt(var_x) * libm::sqrt(var_y));
    Ok(r.clamp(-1.0, 1.0))
}

/// Result of one trust evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrustEvaluation {
    InsufficientHistory,
    Undefined,
    Weak { r: f64 },
    WrongSign { r: f64 },
    Earned { r: f64, trust: f64 },
}

/// One row of the Cooperating Networks Table.
#[derive(Debug, Clone, PartialEq)]
pub struct CntEntry {
    pub node_id: NodeId,
    pub category: NetworkCategory,
    pub distance_km: f64,
    pub trust: f64,
    /// Declared by the remote in its first update.
    pub update_interval_s: Option<f64>,
    pub latest_value: Option<f64>,
    pub last_update_time: Option<SimTime>,
    /// Paired (local, remote) values, oldest first.
    pub history: VecDeque<(f64, f64)>,
    pairs_since_evaluation: usize,
}

impl CntEntry {
    pub fn new(remote: &GltEntry, distance_km: f64, trust: f64) -> Self {
        Self {
            node_id: remote.node_id,
            category: remote.category.clone(),
            distance_km,
            trust,
            update_interval_s: None,
            latest_value: None,
            last_update_time: None,
            history: VecDeque::new(),
            pairs_since_evaluation: 0,
        }
    }

    /// Stores the remote's latest value without pairing it.
    pub fn note_update(&mut self, remote: f64, now: SimTime, declared_interval_s: Option<f64>) {
        self.latest_value = Some(remote);
        self.last_update_time = Some(self.last_update_time.map_or(now, |t| t.max(now)));
        if self.update_interval_s.is_none() {
            self.update_interval_s = declared_interval_s;
        }
    }

    /// Appends a (local, remote) pair, evicting the oldest at capacity.
    pub fn record_pair(&mut self, local: f64, remote: f64, now: SimTime, policy: &CooperationPolicy) {
        self.note_update(remote, now, None);
        while self.history.len() >= policy.history_capacity {
            self.history.pop_front();
        }
        self.history.push_back((local, remote));
        self.pairs_since_evaluation += 1;
    }

    /// Adds `trust_bonus` (clamped to `trust_max`) when the history shows a
    /// strong correlation of the expected sign; otherwise leaves trust alone.
    pub fn update_trust(&mut self, policy: &CooperationPolicy) -> TrustEvaluation {
        self.pairs_since_evaluation = 0;
        if self.history.len() < policy.min_history {
            return TrustEvaluation::InsufficientHistory;
        }
        let r = match pearson_correlation(self.history.iter().copied()) {
            Ok(r) => r,
            Err(CorrelationError::Undefined) => return TrustEvaluation::Undefined,
            Err(CorrelationError::InsufficientHistory(_)) => return TrustEvaluation::InsufficientHistory,
        };
        if libm::fabs(r) <= policy.correlation_threshold {
            return TrustEvaluation::Weak { r };
        }
        if !policy.sign_for(&self.category).matches(r) {
            return TrustEvaluation::WrongSign { r };
        }
        self.trust = (self.trust + policy.trust_bonus).min(policy.trust_max);
        TrustEvaluation::Earned { r, trust: self.trust }
    }

    /// Handles a received update: pairs it with the local value when one
    /// exists, and re-evaluates trust on every `min_history`-th pair.
    pub fn observe(
        &mut self,
        local: Option<f64>,
        remote: f64,
        now: SimTime,
        declared_interval_s: Option<f64>,
        policy: &CooperationPolicy,
    ) -> Option<TrustEvaluation> {
        self.note_update(remote, now, declared_interval_s);
        let local = local?;
        self.record_pair(local, remote, now, policy);
        (self.pairs_since_evaluation >= policy.min_history).then(|| self.update_trust(policy))
    }
}

/// Linear freshness weight: 1 for a just-received value, 0 once the value
/// is `t_stale_s` old or if nothing was ever received.
pub fn staleness_weight(entry: &CntEntry, now: SimTime, t_stale_s: f64) -> f64 {
    let Some(last) = entry.last_update_time else {
        return 0.0;
    };
    let age = now.secs_since(last);
    (1.0 - age / t_stale_s).max(0.0)
}

/// Remote entries within `d_max_km` whose category is compatible, each with
/// its proximity trust and an empty history. Sorted by node id.
pub fn build_cnt(self_entry: &GltEntry, glt: &GlobalLookupTable, policy: &CooperationPolicy) -> Vec<CntEntry> {
    glt.iter()
        .filter(|e| e.node_id != self_entry.node_id)
        .filter(|e| policy.compatible_categories.contains(&e.category))
        .filter_map(|e| {
            let d = haversine_distance(self_entry.center, e.center);
            initial_trust(d, policy).ok().map(|trust| CntEntry::new(e, d, trust))
        })
        .collect()
}

/// A gateway's cooperating networks, keyed by node id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CooperatingNetworksTable {
    entries: BTreeMap<NodeId, CntEntry>,
}

impl CooperatingNetworksTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build(self_entry: &GltEntry, glt: &GlobalLookupTable, policy: &CooperationPolicy) -> Self {
        let mut table = Self::new();
        table.refresh(self_entry, glt, policy);
        table
    }

    /// Adds newly qualifying GLT members, leaving existing rows untouched.
    /// Returns the ids that were added.
    pub fn refresh(
        &mut self,
        self_entry: &GltEntry,
        glt: &GlobalLookupTable,
        policy: &CooperationPolicy,
    ) -> Vec<NodeId> {
        let mut added = Vec::new();
        for entry in build_cnt(self_entry, glt, policy) {
            self.entries.entry(entry.node_id).or_insert_with(|| {
                added.push(entry.node_id);
                entry
            });
        }
        added
    }

    pub fn get(&self, id: NodeId) -> Option<&CntEntry> {
        self.entries.get(&id)
    }

    pub fn get_mut(&mut self, id: NodeId) -> Option<&mut CntEntry> {
        self.entries.get_mut(&id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CntEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoCoordinate;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn cat(s: &str) -> NetworkCategory {
        NetworkCategory::named(s)
    }

    fn glt_entry(id: u32, category: &str, lat: f64, lon: f64) -> GltEntry {
        GltEntry {
            node_id: NodeId::new(id).unwrap(),
            address: format!("10.0.0.{id}"),
            center: GeoCoordinate::new(lat, lon).unwrap(),
            category: cat(category),
        }
    }

    /// Textbook two-pass Pearson.
    fn two_pass(pairs: &[(f64, f64)]) -> f64 {
        let n = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let cov: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let vx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let vy: f64 = pairs.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
        cov / libm::sqrt(vx * vy)
    }

    fn zip(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
        a.iter().copied().zip(b.iter().copied()).collect()
    }

    #[test]
    fn perfect_relations() {
        assert_eq!(pearson_correlation(zip(&[1., 2., 3.], &[2., 4., 6.])), Ok(1.0));
        assert_eq!(pearson_correlation(zip(&[1., 2., 3.], &[3., 2., 1.])), Ok(-1.0));
    }

    #[test]
    fn hand_computed_point_eight() {
        let r = pearson_correlation(zip(&[1., 2., 3., 4.], &[1., 3., 2., 4.])).unwrap();
        assert!((r - 0.8).abs() < 1e-12, "{r}");
    }

    #[test]
    fn degenerate_series() {
        assert_eq!(pearson_correlation(zip(&[1., 1., 1.], &[1., 2., 3.])), Err(CorrelationError::Undefined));
        assert_eq!(pearson_correlation(zip(&[1., 2.], &[1., 2.])), Err(CorrelationError::InsufficientHistory(2)));
        assert_eq!(pearson_correlation(Vec::new()), Err(CorrelationError::InsufficientHistory(0)));
    }

    #[test]
    fn initial_trust_is_linear_in_distance() {
        let policy = CooperationPolicy::new(40.0, []);
        assert_eq!(initial_trust(0.0, &policy), Ok(10.0));
        assert_eq!(initial_trust(40.0, &policy), Ok(0.0));
        assert_eq!(initial_trust(10.0, &policy), Ok(7.5));
        assert!(initial_trust(40.001, &policy).is_err());
    }

    #[test]
    fn cnt_filters_by_distance_and_category() {
        // one degree of latitude is ~111.2 km
        let me = glt_entry(1, "Pollution", 41.0, 2.0);
        let a = glt_entry(2, "Traffic", 41.0 + 2.0 / 111.195, 2.0);
        let b = glt_entry(3, "Traffic", 41.0 + 500.0 / 111.195, 2.0);
        let c = glt_entry(4, "Humidity", 41.0 + 1.0 / 111.195, 2.0);
        let mut glt = GlobalLookupTable::new();
        for e in [&me, &a, &b, &c] {
            glt.insert(e.clone());
        }
        let policy = CooperationPolicy::new(50.0, [cat("Traffic")]);
        let cnt = build_cnt(&me, &glt, &policy);
        assert_eq!(cnt.len(), 1);
        assert_eq!(cnt[0].node_id, a.node_id);
        assert!((cnt[0].distance_km - 2.0).abs() < 0.01);
        assert!((cnt[0].trust - 9.6).abs() < 0.01);
        assert!(cnt[0].history.is_empty());

        let none = CooperationPolicy::new(50.0, []);
        assert!(build_cnt(&me, &glt, &none).is_empty());
    }

    #[test]
    fn boundary_distance_is_included_with_zero_trust() {
        let me = glt_entry(1, "Pollution", 0.0, 0.0);
        let edge = glt_entry(2, "Traffic", 1.0, 0.0);
        let mut glt = GlobalLookupTable::new();
        glt.insert(me.clone());
        glt.insert(edge.clone());
        let d = haversine_distance(me.center, edge.center);
        let policy = CooperationPolicy::new(d, [cat("Traffic")]);
        let cnt = build_cnt(&me, &glt, &policy);
        assert_eq!(cnt.len(), 1);
        assert_eq!(cnt[0].trust, 0.0);
    }

    #[test]
    fn refresh_keeps_existing_rows() {
        let me = glt_entry(1, "Pollution", 0.0, 0.0);
        let a = glt_entry(2, "Traffic", 0.0, 0.01);
        let mut glt = GlobalLookupTable::new();
        glt.insert(me.clone());
        glt.insert(a.clone());
        let policy = CooperationPolicy::new(50.0, [cat("Traffic")]);
        let mut cnt = CooperatingNetworksTable::build(&me, &glt, &policy);
        cnt.get_mut(a.node_id).unwrap().trust = 3.0;
        let b = glt_entry(3, "Traffic", 0.01, 0.0);
        glt.insert(b.clone());
        assert_eq!(cnt.refresh(&me, &glt, &policy), vec![b.node_id]);
        assert_eq!(cnt.get(a.node_id).unwrap().trust, 3.0);
        assert_eq!(cnt.len(), 2);
    }

    fn entry_with_trust(trust: f64) -> CntEntry {
        CntEntry::new(&glt_entry(2, "Traffic", 0.0, 0.0), 0.0, trust)
    }

    #[test]
    fn record_pair_ring_behaviour() {
        let policy = CooperationPolicy::new(50.0, []);
        let mut e = entry_with_trust(5.0);
        e.record_pair(1.0, 2.0, SimTime::from_secs(1.0), &policy);
        assert_eq!(e.history.len(), 1);
        for i in 0..300 {
            e.record_pair(i as f64, 0.0, SimTime::from_secs(2.0 + i as f64), &policy);
        }
        assert_eq!(e.history.len(), 256);
        assert_eq!(e.history.front(), Some(&(44.0, 0.0)));
        assert_eq!(e.last_update_time, Some(SimTime::from_secs(301.0)));
        assert_eq!(e.latest_value, Some(0.0));
    }

    fn fill(e: &mut CntEntry, pairs: &[(f64, f64)], policy: &CooperationPolicy) {
        for (i, &(l, r)) in pairs.iter().enumerate() {
            e.record_pair(l, r, SimTime::from_secs(i as f64), policy);
        }
    }

    #[test]
    fn strong_expected_correlation_earns_trust() {
        let policy = CooperationPolicy::new(50.0, []);
        let mut e = entry_with_trust(6.0);
        let pairs: Vec<_> = (0..10).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        fill(&mut e, &pairs, &policy);
        assert!(matches!(e.update_trust(&policy), TrustEvaluation::Earned { trust, .. } if trust == 6.5));
    }

    #[test]
    fn trust_clamps_at_maximum() {
        let policy = CooperationPolicy::new(50.0, []);
        let mut e = entry_with_trust(9.8);
        let pairs: Vec<_> = (0..10).map(|i| (i as f64, i as f64)).collect();
        fill(&mut e, &pairs, &policy);
        e.update_trust(&policy);
        assert_eq!(e.trust, 10.0);
    }

    #[test]
    fn weak_or_wrong_sign_leaves_trust() {
        let policy = CooperationPolicy::new(50.0, []);
        // r = 0.3 exactly is below the 0.7 threshold
        let mut weak = entry_with_trust(4.0);
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let ys = [5.0, 1.0, 4.0, 2.0, 8.0, 3.0, 2.0, 9.0, 1.0, 6.0];
        fill(&mut weak, &zip(&xs, &ys), &policy);
        assert!(matches!(weak.update_trust(&policy), TrustEvaluation::Weak { .. }));
        assert_eq!(weak.trust, 4.0);

        let mut wrong = entry_with_trust(4.0);
        let pairs: Vec<_> = (0..10).map(|i| (i as f64, -(i as f64))).collect();
        fill(&mut wrong, &pairs, &policy);
        assert!(matches!(wrong.update_trust(&policy), TrustEvaluation::WrongSign { .. }));
        assert_eq!(wrong.trust, 4.0);

        let negative = policy.clone().with_sign(cat("Traffic"), CorrelationSign::Negative);
        assert!(matches!(wrong.update_trust(&negative), TrustEvaluation::Earned { .. }));
    }

    #[test]
    fn short_or_constant_history_leaves_trust() {
        let policy = CooperationPolicy::new(50.0, []);
        let mut e = entry_with_trust(4.0);
        fill(&mut e, &[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)], &policy);
        assert_eq!(e.update_trust(&policy), TrustEvaluation::InsufficientHistory);
        let mut flat = entry_with_trust(4.0);
        fill(&mut flat, &[(1.0, 7.0); 12], &policy);
        assert_eq!(flat.update_trust(&policy), TrustEvaluation::Undefined);
        assert_eq!(flat.trust, 4.0);
    }

    #[test]
    fn observe_evaluates_every_min_history_pairs() {
        let policy = CooperationPolicy::new(50.0, []);
        let mut e = entry_with_trust(0.0);
        let mut evaluations = 0;
        for i in 0..200 {
            let v = (i % 17) as f64;
            let t = SimTime::from_secs(i as f64);
            if e.observe(Some(v), 3.0 * v, t, Some(300.0), &policy).is_some() {
                evaluations += 1;
            }
        }
        assert_eq!(evaluations, 20);
        assert_eq!(e.trust, 10.0);
        assert_eq!(e.update_interval_s, Some(300.0));
    }

    #[test]
    fn observe_without_local_value_only_stores_latest() {
        let policy = CooperationPolicy::new(50.0, []);
        let mut e = entry_with_trust(2.0);
        assert_eq!(e.observe(None, 7.0, SimTime::from_secs(5.0), Some(600.0), &policy), None);
        assert!(e.history.is_empty());
        assert_eq!(e.latest_value, Some(7.0));
        assert_eq!(e.update_interval_s, Some(600.0));
    }

    #[test]
    fn staleness_is_linear() {
        let policy = CooperationPolicy::new(50.0, []);
        let mut e = entry_with_trust(2.0);
        assert_eq!(staleness_weight(&e, SimTime::from_secs(10.0), 100.0), 0.0);
        e.record_pair(0.0, 0.0, SimTime::from_secs(100.0), &policy);
        assert_eq!(staleness_weight(&e, SimTime::from_secs(100.0), 100.0), 1.0);
        assert_eq!(staleness_weight(&e, SimTime::from_secs(150.0), 100.0), 0.5);
        assert_eq!(staleness_weight(&e, SimTime::from_secs(200.0), 100.0), 0.0);
        assert_eq!(staleness_weight(&e, SimTime::from_secs(900.0), 100.0), 0.0);
    }

    #[test]
    fn policy_validation() {
        let ok = CooperationPolicy::new(10.0, []);
        assert!(ok.validate().is_ok());
        assert!(CooperationPolicy { d_max_km: 0.0, ..ok.clone() }.validate().is_err());
        assert!(CooperationPolicy { correlation_threshold: 1.0, ..ok.clone() }.validate().is_err());
        assert!(CooperationPolicy { min_history: 2, ..ok.clone() }.validate().is_err());
        assert!(CooperationPolicy { history_capacity: 5, ..ok }.validate().is_err());
    }

    fn series() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1000.0f64..1000.0, -1000.0f64..1000.0), 3..256)
    }

    proptest! {
        #[test]
        fn matches_two_pass_oracle(pairs in series()) {
            let r = pearson_correlation(pairs.iter().copied()).unwrap();
            prop_assert!((r - two_pass(&pairs)).abs() < 1e-9);
            prop_assert!(r.abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn affine_invariance(pairs in series(), a in 0.01f64..100.0, b in -1e4f64..1e4) {
            let r = pearson_correlation(pairs.iter().copied()).unwrap();
            let moved = pearson_correlation(pairs.iter().map(|&(x, y)| (x, a * y + b))).unwrap();
            prop_assert!((r - moved).abs() < 1e-9);
        }

        #[test]
        fn initial_trust_strictly_decreasing(d_max in 0.1f64..1000.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
            prop_assume!((u - v).abs() > 1e-9);
            let policy = CooperationPolicy::new(d_max, []);
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            prop_assert!(initial_trust(lo * d_max, &policy).unwrap() > initial_trust(hi * d_max, &policy).unwrap());
        }

        #[test]
        fn trust_monotone_under_correlated_remote(start in 0.0f64..10.0, slope in 0.1f64..5.0) {
            let policy = CooperationPolicy::new(50.0, []);
            let mut e = entry_with_trust(start);
            let mut last = start;
            for i in 0..400 {
                let v = ((i * 7) % 23) as f64;
                e.observe(Some(v), slope * v + 2.0, SimTime::from_secs(i as f64), None, &policy);
                prop_assert!(e.trust >= last);
                last = e.trust;
            }
            prop_assert_eq!(e.trust, 10.0);
        }
    }
}
