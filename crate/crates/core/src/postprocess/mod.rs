//! Clean-up of predicted label maps.
//!
//! A segmentation network sometimes paints one tooth label in several
//! disconnected places. The largest component of each label is kept; every
//! smaller one is "unwanted" and gets dissolved into whatever surrounds it:
//!
//! * **Case I**: only background around it, so it becomes background.
//! * **Case II**: background plus exactly one tooth label; background is
//!   ignored and the region joins that tooth.
//! * **Case III**: two or more tooth labels; the label touching the most
//!   border pixels wins, ties going to the lowest label id.
//!
//! Unwanted regions are processed largest first, and neighbour profiles are
//! recomputed against the partially updated map after each step.

mod chain;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::labelmap::{extract_instances, Instance, LabelMap, NEIGHBORS_8};

use chain::RegionGrid;
pub use chain::{border_pixels, trace_border, ChainCode, FREEMAN};

/// How many border pixels of a region touch each neighbouring label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NeighborProfile {
    pub counts: BTreeMap<u8, usize>,
}

/// The three dissolution cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    I,
    II,
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub case: Case,
    pub label: u8,
}

/// Counts, per label, the border pixels of `region` that have at least one
/// 8-neighbour of that label outside the region. Neighbours beyond the image
/// edge are ignored.
pub fn neighbor_profile(region: &Instance, map: &LabelMap) -> NeighborProfile {
    let grid = RegionGrid::new(region);
    let mut counts = BTreeMap::new();
    let mut seen = Vec::with_capacity(8);
    for (x, y) in border_pixels(region, map.width(), map.height()) {
        seen.clear();
        for (dx, dy) in NEIGHBORS_8 {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if grid.contains(nx, ny) {
                continue;
            }
            if let Some(label) = map.get_signed(nx, ny) {
                if !seen.contains(&label) {
                    seen.push(label);
                }
            }
        }
        for &label in &seen {
            *counts.entry(label).or_insert(0) += 1;
        }
    }
    NeighborProfile { counts }
}

/// Picks the label an unwanted region dissolves into.
///
/// An empty profile (a region with no neighbours at all) resolves as Case I.
pub fn resolve_region(profile: &NeighborProfile) -> Resolution {
    let teeth: Vec<(u8, usize)> = profile
        .counts
        .iter()
        .filter(|(&l, &c)| l != 0 && c > 0)
        .map(|(&l, &c)| (l, c))
        .collect();
    match teeth.as_slice() {
        [] => Resolution {
            case: Case::I,
            label: 0,
        },
        [(label, _)] => Resolution {
            case: Case::II,
            label: *label,
        },
        _ => {
            // Ascending label order plus strict `>` keeps the lowest id on ties.
            let mut best = teeth[0];
            for &(l, c) in &teeth[1..] {
                if c > best.1 {
                    best = (l, c);
                }
            }
            Resolution {
                case: Case::III,
                label: best.0,
            }
        }
    }
}

/// One dissolved region in the change log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeRecord {
    pub label: u8,
    pub area: usize,
    pub case: Case,
    pub new_label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Postprocessed {
    pub map: LabelMap,
    pub changes: Vec<ChangeRecord>,
}

/// Leaves at most one 8-connected component per label.
pub fn postprocess(map: &LabelMap) -> Postprocessed {
    let mut work = map.clone();
    let mut changes = Vec::new();

    // Pin one pixel of each label's largest component. Those pixels are never
    // repainted, so the component containing them is always the keeper.
    let mut keepers: BTreeMap<u8, &Instance> = BTreeMap::new();
    let initial = extract_instances(map);
    for inst in &initial {
        keepers
            .entry(inst.label)
            .and_modify(|k| {
                if inst.area > k.area {
                    *k = inst;
                }
            })
            .or_insert(inst);
    }
    let anchors: BTreeMap<u8, (usize, usize)> =
        keepers.iter().map(|(&l, k)| (l, k.top_left())).collect();

    loop {
        let instances = extract_instances(&work);
        let victim = instances
            .iter()
            .filter(|inst| !contains_pixel(inst, anchors[&inst.label]))
            .min_by_key(|inst| {
                let (x, y) = inst.top_left();
                (std::cmp::Reverse(inst.area), inst.label, y, x)
            });
        let Some(victim) = victim else { break };

        let resolution = resolve_region(&neighbor_profile(victim, &work));
        log::debug!(
            "label {} region of {} px at {:?}: case {:?} -> {}",
            victim.label,
            victim.area,
            victim.top_left(),
            resolution.case,
            resolution.label
        );
        for &(x, y) in &victim.pixels {
            work.set(x, y, resolution.label);
        }
        changes.push(ChangeRecord {
            label: victim.label,
            area: victim.area,
            case: resolution.case,
            new_label: resolution.label,
        });
    }

    Postprocessed { map: work, changes }
}

fn contains_pixel(inst: &Instance, (x, y): (usize, usize)) -> bool {
    inst.pixels
        .binary_search_by_key(&(y, x), |&(px, py)| (py, px))
        .is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(pairs: &[(u8, usize)]) -> NeighborProfile {
        NeighborProfile {
            counts: pairs.iter().copied().collect(),
        }
    }

    fn single(map: &LabelMap, label: u8) -> Instance {
        extract_instances(map)
            .into_iter()
            .find(|i| i.label == label)
            .unwrap()
    }

    #[test]
    fn resolve_cases() {
        assert_eq!(
            resolve_region(&profile(&[(0, 12)])),
            Resolution {
                case: Case::I,
                label: 0
            }
        );
        assert_eq!(
            resolve_region(&profile(&[(0, 4), (7, 9)])),
            Resolution {
                case: Case::II,
                label: 7
            }
        );
        assert_eq!(
            resolve_region(&profile(&[(7, 5), (8, 3)])),
            Resolution {
                case: Case::III,
                label: 7
            }
        );
    }

    #[test]
    fn case_three_tie_goes_to_lowest_label() {
        let r = resolve_region(&profile(&[(0, 9), (12, 4), (5, 4), (20, 1)]));
        assert_eq!(r.label, 5);
        assert_eq!(r.case, Case::III);
    }

    #[test]
    fn isolated_region_sees_only_background() {
        let mut m = LabelMap::background(5, 5).unwrap();
        m.set(2, 2, 3);
        let p = neighbor_profile(&single(&m, 3), &m);
        assert_eq!(p.counts.keys().copied().collect::<Vec<_>>(), vec![0]);
        assert_eq!(p.counts[&0], 1);
    }

    #[test]
    fn region_touching_seven_on_one_side() {
        let m = LabelMap::from_rows(&[
            [0u8, 0, 0, 0, 0],
            [0, 3, 3, 7, 0],
            [0, 3, 3, 7, 0],
            [0, 0, 0, 7, 0],
            [0, 0, 0, 0, 0],
        ])
        .unwrap();
        let p = neighbor_profile(&single(&m, 3), &m);
        // Every one of the four border pixels touches background; (2,1) and
        // (2,2) touch 7 directly, (1,1)/(1,2) do not reach column 3.
        assert_eq!(p.counts, [(0, 4), (7, 2)].into_iter().collect());
    }

    #[test]
    fn region_embedded_in_seven() {
        let m = LabelMap::from_rows(&[
            [7u8, 7, 7, 7, 7],
            [7, 7, 7, 7, 7],
            [7, 7, 2, 7, 7],
            [7, 7, 7, 7, 7],
            [7, 7, 7, 7, 7],
        ])
        .unwrap();
        let p = neighbor_profile(&single(&m, 2), &m);
        assert_eq!(p.counts, [(7, 1)].into_iter().collect());
    }

    #[test]
    fn one_component_per_label_is_a_fixpoint() {
        let m = LabelMap::from_rows(&[[1u8, 1, 0, 2], [0, 0, 0, 2], [3, 0, 4, 4]]).unwrap();
        let out = postprocess(&m);
        assert_eq!(out.map, m);
        assert!(out.changes.is_empty());
    }

    #[test]
    fn case_one_fixture() {
        // Label 7: a 10x10 block (area 100) and a 5-pixel island in background.
        let mut m = LabelMap::background(20, 14).unwrap();
        for y in 0..10 {
            for x in 0..10 {
                m.set(x, y, 7);
            }
        }
        for x in 13..18 {
            m.set(x, 12, 7);
        }
        let out = postprocess(&m);
        assert_eq!(
            out.changes,
            vec![ChangeRecord {
                label: 7,
                area: 5,
                case: Case::I,
                new_label: 0
            }]
        );
        for x in 13..18 {
            assert_eq!(out.map.get(x, 12), 0);
        }
        assert_eq!(out.map.get(9, 9), 7);
    }

    #[test]
    fn case_two_fixture() {
        let m = LabelMap::from_rows(&[
            [7u8, 7, 7, 0, 0, 0],
            [7, 7, 7, 0, 0, 0],
            [0, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 4, 4],
            [0, 0, 0, 7, 4, 4],
        ])
        .unwrap();
        let out = postprocess(&m);
        assert_eq!(out.changes[0].case, Case::II);
        assert_eq!(out.map.get(3, 4), 4);
    }

    #[test]
    fn case_three_fixture() {
        // A 5-pixel column of 7 at x = 5, flanked by a full column of 6
        // (5 contacts) and a two-pixel stub of 8 (3 contacts incl. one diagonal).
        let mut m = LabelMap::background(12, 8).unwrap();
        for y in 1..6 {
            m.set(4, y, 6);
            m.set(5, y, 7);
        }
        m.set(6, 1, 8);
        m.set(6, 2, 8);
        for y in 0..4 {
            for x in 8..12 {
                m.set(x, y, 7);
            }
        }
        let small = extract_instances(&m)
            .into_iter()
            .find(|i| i.label == 7 && i.area == 5)
            .unwrap();
        let p = neighbor_profile(&small, &m);
        assert_eq!(p.counts[&6], 5);
        assert_eq!(p.counts[&8], 3);

        let out = postprocess(&m);
        assert_eq!(
            out.changes,
            vec![ChangeRecord {
                label: 7,
                area: 5,
                case: Case::III,
                new_label: 6
            }]
        );
        for y in 1..6 {
            assert_eq!(out.map.get(5, y), 6);
        }
    }

    #[test]
    fn equal_area_keeps_first_in_scan_order() {
        let m = LabelMap::from_rows(&[[5u8, 0, 0], [0, 0, 0], [0, 0, 5]]).unwrap();
        let out = postprocess(&m);
        assert_eq!(out.map.get(0, 0), 5);
        assert_eq!(out.map.get(2, 2), 0);
    }

    #[test]
    fn cascades_settle() {
        // Unwanted 3 sits next to unwanted 2; whichever merges first, the
        // result must still hold one component per label.
        let m = LabelMap::from_rows(&[
            [2u8, 2, 2, 0, 0, 0, 0],
            [2, 2, 2, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 3, 3],
            [0, 0, 0, 0, 0, 3, 3],
            [0, 3, 2, 2, 0, 3, 3],
        ])
        .unwrap();
        let out = postprocess(&m);
        let insts = extract_instances(&out.map);
        let mut labels: Vec<u8> = insts.iter().map(|i| i.label).collect();
        let n = labels.len();
        labels.dedup();
        assert_eq!(labels.len(), n);
        assert_eq!(postprocess(&out.map).map, out.map);
    }
}
