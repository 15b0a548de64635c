//! Discrete abelian groups given by canonical words, with nested Følner sets.
//!
//! Supported summands are Z, Z_n and the restricted sum ⊕_k Z₂ (at most one,
//! encoded as a bit mask). Integer summands occupy up to four word slots.

use std::fmt;

use crate::error::{Error, Result};

/// Largest Følner set that may be materialized as a list.
pub const FOLNER_CAP: u64 = 1 << 24;

const MAX_SLOTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupKind {
    FreeAbelian(u32),
    FiniteCyclic(u64),
    InfiniteSumZ2,
    DirectSum(Vec<GroupKind>),
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::FreeAbelian(1) => f.write_str("Z"),
            GroupKind::FreeAbelian(r) => write!(f, "Z^{r}"),
            GroupKind::FiniteCyclic(n) => write!(f, "Z_{n}"),
            GroupKind::InfiniteSumZ2 => f.write_str("(+)Z_2"),
            GroupKind::DirectSum(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

/// One flattened summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Summand {
    Integer { slot: usize },
    Cyclic { slot: usize, order: u64 },
    Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDescriptor {
    kind: GroupKind,
    summands: Vec<Summand>,
    id: u64,
}

/// Element of a [`GroupDescriptor`] in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    group: u64,
    word: [i64; MAX_SLOTS],
    bits: u64,
}

impl GroupElement {
    pub fn group_id(&self) -> u64 {
        self.group
    }

    /// Exponent of the integer or cyclic generator in `slot`.
    pub fn int(&self, slot: usize) -> i64 {
        self.word[slot]
    }

    /// Support of the ⊕Z₂ part: bit k-1 is coordinate k.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn word(&self) -> [i64; MAX_SLOTS] {
        self.word
    }
}

impl GroupDescriptor {
    pub fn new(kind: GroupKind) -> Result<Self> {
        let mut summands = Vec::new();
        let mut slots = 0usize;
        flatten(&kind, &mut summands, &mut slots)?;
        if slots > MAX_SLOTS {
            return Err(Error::unsupported(format!("at most {MAX_SLOTS} integer summands are supported")));
        }
        if summands.iter().filter(|s| matches!(s, Summand::Bits)).count() > 1 {
            return Err(Error::unsupported("at most one (+)Z_2 summand is supported"));
        }
        if summands.is_empty() {
            return Err(Error::domain("group needs at least one summand"));
        }
        let id = fingerprint(&kind.to_string());
        Ok(GroupDescriptor { kind, summands, id })
    }

    pub fn integers() -> Self {
        GroupDescriptor::new(GroupKind::FreeAbelian(1)).expect("Z is supported")
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { group: self.id, word: [0; MAX_SLOTS], bits: 0 }
    }

    /// Builds the canonical element with integer exponents `ints` (one per
    /// integer or cyclic summand, in declaration order) and ⊕Z₂ support `bits`.
    pub fn element(&self, ints: &[i64], bits: u64) -> Result<GroupElement> {
        let slots = self.slot_count();
        if ints.len() != slots {
            return Err(Error::domain(format!("expected {slots} exponents, got {}", ints.len())));
        }
        if bits != 0 && !self.has_bits() {
            return Err(Error::domain("group has no (+)Z_2 summand"));
        }
        let mut word = [0; MAX_SLOTS];
        word[..slots].copy_from_slice(ints);
        Ok(self.normalize(GroupElement { group: self.id, word, bits }))
    }

    fn slot_count(&self) -> usize {
        self.summands.iter().filter(|s| !matches!(s, Summand::Bits)).count()
    }

    pub fn has_bits(&self) -> bool {
        self.summands.contains(&Summand::Bits)
    }

    pub fn has_integer(&self) -> bool {
        self.summands.iter().any(|s| matches!(s, Summand::Integer { .. }))
    }

    pub fn is_finite(&self) -> bool {
        self.summands.iter().all(|s| matches!(s, Summand::Cyclic { .. }))
    }

    fn normalize(&self, mut e: GroupElement) -> GroupElement {
        for s in &self.summands {
            if let Summand::Cyclic { slot, order } = *s {
                e.word[slot] = e.word[slot].rem_euclid(order as i64);
            }
        }
        e
    }

    fn check(&self, e: &GroupElement) -> Result<()> {
        if e.group == self.id {
            Ok(())
        } else {
            Err(Error::domain(format!("element does not belong to group {}", self.kind)))
        }
    }

    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        let mut word = [0; MAX_SLOTS];
        for (w, (x, y)) in word.iter_mut().zip(a.word.iter().zip(&b.word)) {
            *w = x.checked_add(*y).ok_or_else(|| Error::domain("group word overflow"))?;
        }
        Ok(self.normalize(GroupElement { group: self.id, word, bits: a.bits ^ b.bits }))
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        let mut word = a.word;
        for w in &mut word {
            *w = -*w;
        }
        Ok(self.normalize(GroupElement { group: self.id, word, bits: a.bits }))
    }

    /// Canonical generators: one per integer or cyclic summand, then the
    /// first `bit_generators` coordinates of ⊕Z₂.
    pub fn generators(&self, bit_generators: u32) -> Vec<GroupElement> {
        let mut out = Vec::new();
        for s in &self.summands {
            match *s {
                Summand::Integer { slot } | Summand::Cyclic { slot, .. } => {
                    let mut word = [0; MAX_SLOTS];
                    word[slot] = 1;
                    out.push(self.normalize(GroupElement { group: self.id, word, bits: 0 }));
                }
                Summand::Bits => out.extend(
                    (0..bit_generators.min(64)).map(|k| GroupElement { group: self.id, word: [0; MAX_SLOTS], bits: 1 << k }),
                ),
            }
        }
        out
    }

    /// Number of elements of the Følner set at `index`, saturating.
    pub fn folner_size(&self, index: u64) -> u64 {
        self.summands.iter().fold(1u64, |acc, s| acc.saturating_mul(self.radix(s, index)))
    }

    fn radix(&self, s: &Summand, index: u64) -> u64 {
        match *s {
            Summand::Integer { .. } => index.saturating_mul(2).saturating_add(1),
            Summand::Cyclic { order, .. } => order,
            Summand::Bits => {
                if index >= 64 {
                    u64::MAX
                } else {
                    1u64 << index
                }
            }
        }
    }

    /// Whether `e` lies in the Følner set at `index`.
    pub fn in_folner(&self, e: &GroupElement, index: u64) -> bool {
        self.summands.iter().all(|s| match *s {
            Summand::Integer { slot } => e.word[slot].unsigned_abs() <= index,
            Summand::Cyclic { .. } => true,
            Summand::Bits => index >= 64 || e.bits >> index == 0,
        })
    }

    /// The `i`-th element of the Følner set at `index` in its fixed order:
    /// the first summand is the most significant digit, integers run
    /// 0, 1, −1, 2, −2, … and bit masks run in numeric order.
    pub fn folner_element(&self, index: u64, mut i: u64) -> GroupElement {
        let mut e = self.identity();
        for s in self.summands.iter().rev() {
            let radix = self.radix(s, index);
            let digit = if radix == u64::MAX { i } else { i % radix };
            i = if radix == u64::MAX { 0 } else { i / radix };
            match *s {
                Summand::Integer { slot } => e.word[slot] = zigzag(digit),
                Summand::Cyclic { slot, .. } => e.word[slot] = digit as i64,
                Summand::Bits => e.bits = digit,
            }
        }
        e
    }

    pub fn folner_set(&self, index: u64) -> Result<FolnerSet> {
        let size = self.folner_size(index);
        if size > FOLNER_CAP {
            return Err(Error::Resource(format!(
                "Følner set at index {index} has {size} elements, above the cap of {FOLNER_CAP}"
            )));
        }
        let elements = (0..size).map(|i| self.folner_element(index, i)).collect();
        Ok(FolnerSet { index, elements })
    }

    /// Indices of the Følner set at `index` that are not in the set at `prev`.
    pub fn shell(&self, prev: Option<u64>, index: u64) -> impl Iterator<Item = GroupElement> + '_ {
        let size = self.folner_size(index);
        // For a single integer summand the smaller set is a prefix.
        let start = match (prev, self.summands.as_slice()) {
            (Some(p), [Summand::Integer { .. }] | [Summand::Bits]) => self.folner_size(p).min(size),
            _ => 0,
        };
        (start..size)
            .map(move |i| self.folner_element(index, i))
            .filter(move |e| prev.is_none_or(|p| !self.in_folner(e, p)))
    }

    /// Largest Følner index allowed by an averaging bound `n_max`: the bound
    /// itself when there is an integer summand, ⌊log₂ n_max⌋ for ⊕Z₂ alone,
    /// zero for finite groups.
    pub fn max_index(&self, n_max: u64) -> u64 {
        if self.summands.iter().any(|s| matches!(s, Summand::Integer { .. })) {
            n_max
        } else if self.has_bits() {
            n_max.max(1).ilog2() as u64
        } else {
            0
        }
    }

    /// Next index of the averaging schedule: doubling when there is an integer
    /// summand, one more coordinate for ⊕Z₂ alone.
    pub fn next_index(&self, index: u64) -> u64 {
        if self.summands.iter().any(|s| matches!(s, Summand::Integer { .. })) {
            (index * 2).max(1)
        } else {
            index + 1
        }
    }

    /// Element from a textual word: comma-separated exponents, then an
    /// optional `;bits=0110` part for the ⊕Z₂ summand.
    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let (ints_part, bits_part) = match s.split_once(';') {
            Some((a, b)) => (a, Some(b)),
            None if s.trim_start().starts_with("bits=") => ("", Some(s)),
            None => (s, None),
        };
        let ints = ints_part
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<i64>().map_err(|_| Error::domain(format!("bad exponent `{p}`"))))
            .collect::<Result<Vec<_>>>()?;
        let bits = match bits_part {
            Some(b) => {
                let raw = b.trim().strip_prefix("bits=").ok_or_else(|| Error::domain("expected bits=…"))?;
                if raw.len() > 64 || !raw.chars().all(|c| c == '0' || c == '1') {
                    return Err(Error::domain(format!("bad bit string `{raw}`")));
                }
                raw.chars().enumerate().fold(0u64, |acc, (k, c)| if c == '1' { acc | 1 << k } else { acc })
            }
            None => 0,
        };
        self.element(&ints, bits)
    }

    pub fn format_element(&self, e: &GroupElement) -> String {
        let mut parts: Vec<String> = e.word[..self.slot_count()].iter().map(|w| w.to_string()).collect();
        if self.has_bits() {
            let len = (64 - e.bits.leading_zeros()).max(1);
            let s: String = (0..len).map(|k| if e.bits >> k & 1 == 1 { '1' } else { '0' }).collect();
            parts.push(format!("bits={s}"));
        }
        if self.has_bits() && self.slot_count() > 0 {
            let last = parts.pop().unwrap_or_default();
            format!("{};{last}", parts.join(","))
        } else {
            parts.join(",")
        }
    }
}

fn flatten(kind: &GroupKind, out: &mut Vec<Summand>, slots: &mut usize) -> Result<()> {
    match kind {
        GroupKind::FreeAbelian(rank) => {
            if *rank == 0 {
                return Err(Error::domain("free abelian group needs rank ≥ 1"));
            }
            for _ in 0..*rank {
                out.push(Summand::Integer { slot: *slots });
                *slots += 1;
            }
        }
        GroupKind::FiniteCyclic(order) => {
            if *order == 0 || *order > i64::MAX as u64 {
                return Err(Error::domain(format!("bad cyclic order {order}")));
            }
            out.push(Summand::Cyclic { slot: *slots, order: *order });
            *slots += 1;
        }
        GroupKind::InfiniteSumZ2 => out.push(Summand::Bits),
        GroupKind::DirectSum(parts) => {
            for p in parts {
                flatten(p, out, slots)?;
            }
        }
    }
    Ok(())
}

/// 0, 1, −1, 2, −2, …
fn zigzag(d: u64) -> i64 {
    if d % 2 == 1 {
        (d / 2 + 1) as i64
    } else {
        -((d / 2) as i64)
    }
}

/// FNV-1a over the textual group description.
fn fingerprint(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerSet {
    pub index: u64,
    pub elements: Vec<GroupElement>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn z_plus_z3() -> GroupDescriptor {
        GroupDescriptor::new(GroupKind::DirectSum(vec![GroupKind::FreeAbelian(1), GroupKind::FiniteCyclic(3)])).unwrap()
    }

    fn sum_z2() -> GroupDescriptor {
        GroupDescriptor::new(GroupKind::InfiniteSumZ2).unwrap()
    }

    #[test]
    fn composition_examples() {
        let z = GroupDescriptor::integers();
        let a = z.element(&[3], 0).unwrap();
        let b = z.element(&[-3], 0).unwrap();
        assert_eq!(z.compose(&a, &b).unwrap(), z.identity());

        let g = sum_z2();
        let x = g.parse_element("bits=1010").unwrap();
        assert_eq!(g.compose(&x, &x).unwrap(), g.identity());

        let c = z_plus_z3();
        let p = c.element(&[2, 1], 0).unwrap();
        let q = c.element(&[1, 2], 0).unwrap();
        assert_eq!(c.compose(&p, &q).unwrap(), c.element(&[3, 0], 0).unwrap());
    }

    #[test]
    fn foreign_elements_are_rejected() {
        let z = GroupDescriptor::integers();
        let c = z_plus_z3();
        let e = c.identity();
        assert!(matches!(z.compose(&z.identity(), &e), Err(Error::Domain(_))));
    }

    #[test]
    fn folner_examples() {
        let z = GroupDescriptor::integers();
        let words: Vec<i64> = z.folner_set(2).unwrap().elements.iter().map(|e| e.int(0)).collect();
        assert_eq!(words, vec![0, 1, -1, 2, -2]);
        assert_eq!(sum_z2().folner_set(3).unwrap().elements.len(), 8);
        for n in 0..5 {
            let set = z_plus_z3().folner_set(n).unwrap();
            assert_eq!(set.elements.len() as u64, 3 * (2 * n + 1));
            let distinct: HashSet<_> = set.elements.iter().collect();
            assert_eq!(distinct.len(), set.elements.len());
            assert!(set.elements.iter().all(|e| e.int(0).unsigned_abs() <= n && (0..3).contains(&e.int(1))));
        }
    }

    #[test]
    fn folner_cap_is_enforced() {
        assert!(matches!(GroupDescriptor::integers().folner_set(1 << 24), Err(Error::Resource(_))));
        assert!(matches!(sum_z2().folner_set(30), Err(Error::Resource(_))));
    }

    #[test]
    fn shells_partition_the_next_set() {
        for g in [GroupDescriptor::integers(), z_plus_z3(), sum_z2()] {
            let mut seen: Vec<GroupElement> = g.shell(None, 2).collect();
            seen.extend(g.shell(Some(2), 5));
            let mut expected = g.folner_set(5).unwrap().elements;
            let key = |e: &GroupElement| (e.word, e.bits);
            seen.sort_by_key(key);
            expected.sort_by_key(key);
            assert_eq!(seen, expected);
        }
    }

    #[test]
    fn amenability_ratio_for_integers() {
        let z = GroupDescriptor::integers();
        for n in [5u64, 40] {
            let set: HashSet<i64> = z.folner_set(n).unwrap().elements.iter().map(|e| e.int(0)).collect();
            for g in [1i64, 3, 7] {
                let moved: HashSet<i64> = set.iter().map(|v| v + g).collect();
                let sym = set.symmetric_difference(&moved).count();
                assert_eq!(sym as u64 * (2 * n + 1), 2 * g as u64 * (2 * n + 1));
                assert_eq!(sym, 2 * g as usize);
            }
        }
    }

    #[test]
    fn budget_and_schedule() {
        assert_eq!(GroupDescriptor::integers().max_index(1 << 20), 1 << 20);
        assert_eq!(sum_z2().max_index(1 << 20), 20);
        assert_eq!(sum_z2().next_index(3), 4);
        assert_eq!(GroupDescriptor::integers().next_index(1024), 2048);
        let c3 = GroupDescriptor::new(GroupKind::FiniteCyclic(3)).unwrap();
        assert_eq!(c3.max_index(100), 0);
        assert_eq!(c3.folner_set(0).unwrap().elements.len(), 3);
    }

    #[test]
    fn element_text_round_trips() {
        let g = GroupDescriptor::new(GroupKind::DirectSum(vec![GroupKind::FreeAbelian(1), GroupKind::InfiniteSumZ2])).unwrap();
        let e = g.element(&[-4], 0b1101).unwrap();
        assert_eq!(g.parse_element(&g.format_element(&e)).unwrap(), e);
    }

    proptest! {
        #[test]
        fn group_axioms_hold(a in -1000i64..1000, b in -1000i64..1000, c in -1000i64..1000,
                             x in 0u64..1 << 20, y in 0u64..1 << 20, z in 0u64..1 << 20,
                             i in 0i64..50, j in 0i64..50, k in 0i64..50) {
            let g = GroupDescriptor::new(GroupKind::DirectSum(vec![
                GroupKind::FreeAbelian(1), GroupKind::FiniteCyclic(3), GroupKind::InfiniteSumZ2,
            ])).unwrap();
            let p = g.element(&[a, i], x).unwrap();
            let q = g.element(&[b, j], y).unwrap();
            let r = g.element(&[c, k], z).unwrap();
            let left = g.compose(&g.compose(&p, &q).unwrap(), &r).unwrap();
            let right = g.compose(&p, &g.compose(&q, &r).unwrap()).unwrap();
            prop_assert_eq!(left, right);
            prop_assert_eq!(g.compose(&p, &g.inverse(&p).unwrap()).unwrap(), g.identity());
            prop_assert_eq!(g.compose(&p, &q).unwrap(), g.compose(&q, &p).unwrap());
            prop_assert!((0..3).contains(&p.int(1)));
        }

        #[test]
        fn folner_sets_are_nested(n in 0u64..40) {
            for g in [GroupDescriptor::integers(), z_plus_z3()] {
                let small = g.folner_set(n).unwrap();
                prop_assert!(small.elements.iter().all(|e| g.in_folner(e, n + 1)));
            }
            let m = n % 12;
            prop_assert!(sum_z2().folner_set(m).unwrap().elements.iter().all(|e| sum_z2().in_folner(e, m + 1)));
        }
    }
}
