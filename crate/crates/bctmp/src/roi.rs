//! Region of interest: the set of object poses preprocessing must cover.
//!
//! An RoI is a union of disjoint boxes in (x, y, theta), each discretized
//! into grid cells of a shared resolution. Cells are identified by region
//! plus integer coordinates and addressed globally through a linear index.
//! The theta axis wraps, so a box spanning the full circle behaves
//! seamlessly for membership tests.

use crate::geom::{wrap_angle, Pose2};
use crate::instrument;
use crate::tolerances::{METRIC_THETA_WEIGHT, ROLLOUT_ANG_TOL, ROLLOUT_POS_TOL};
use serde::{Deserialize, Serialize};

/// One axis-aligned box of object poses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoiBox {
    /// `[low, high)` in meters.
    pub x: (f64, f64),
    /// `[low, high)` in meters.
    pub y: (f64, f64),
    /// `[low, high)` in radians; interpreted on the circle, so the interval
    /// may cross the wrap seam.
    pub theta: (f64, f64),
}

/// Union of boxes plus the grid resolution shared by all of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionOfInterest {
    pub regions: Vec<RoiBox>,
    /// Cell size per axis: `[dx, dy, dtheta]`.
    pub delta: [f64; 3],
}

/// Grid cell identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub region: u32,
    pub ix: u32,
    pub iy: u32,
    pub itheta: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum RoiError {
    #[error("delta components must be positive, got {0:?}")]
    BadDelta([f64; 3]),
    #[error("region {index} axis {axis} bounds ({low}, {high}) are not an interval")]
    BadBounds {
        index: usize,
        axis: char,
        low: f64,
        high: f64,
    },
    #[error("region {index} theta span {span} exceeds the full circle")]
    ThetaSpanTooWide { index: usize, span: f64 },
}

/// How far along the wrapped theta axis `t` sits past `low`, in `[0, 2pi)`.
fn theta_offset(t: f64, low: f64) -> f64 {
    (t - low).rem_euclid(2.0 * std::f64::consts::PI)
}

impl RegionOfInterest {
    pub fn validate(&self) -> Result<(), RoiError> {
        if !self.delta.iter().all(|d| *d > 0.0) {
            return Err(RoiError::BadDelta(self.delta));
        }
        for (index, r) in self.regions.iter().enumerate() {
            for (axis, (low, high)) in [('x', r.x), ('y', r.y)] {
                if !(low < high) {
                    return Err(RoiError::BadBounds {
                        index,
                        axis,
                        low,
                        high,
                    });
                }
            }
            let span = r.theta.1 - r.theta.0;
            if !(span > 0.0) {
                return Err(RoiError::BadBounds {
                    index,
                    axis: 't',
                    low: r.theta.0,
                    high: r.theta.1,
                });
            }
            if span > 2.0 * std::f64::consts::PI + 1e-9 {
                return Err(RoiError::ThetaSpanTooWide { index, span });
            }
        }
        Ok(())
    }

    /// Grid dimensions of one region: cells per axis, at least one each.
    #[must_use]
    pub fn region_dims(&self, region: usize) -> (u32, u32, u32) {
        let r = &self.regions[region];
        let count = |low: f64, high: f64, d: f64| -> u32 {
            (((high - low) / d + 1e-9).floor() as u32).max(1)
        };
        (
            count(r.x.0, r.x.1, self.delta[0]),
            count(r.y.0, r.y.1, self.delta[1]),
            count(r.theta.0, r.theta.1, self.delta[2]),
        )
    }

    /// Total cell count across regions.
    #[must_use]
    pub fn cell_count(&self) -> u64 {
        (0..self.regions.len())
            .map(|r| {
                let (nx, ny, nt) = self.region_dims(r);
                nx as u64 * ny as u64 * nt as u64
            })
            .sum()
    }

    /// Center pose of a cell. The last cell on each axis absorbs any
    /// remainder left by an uneven division (including the whole span when
    /// the resolution exceeds it), so centers always lie inside the region.
    #[must_use]
    pub fn center(&self, cell: CellId) -> Pose2 {
        let r = &self.regions[cell.region as usize];
        let (nx, ny, nt) = self.region_dims(cell.region as usize);
        let axis = |low: f64, high: f64, i: u32, d: f64, n: u32| -> f64 {
            if i + 1 == n {
                (low + i as f64 * d + high) / 2.0
            } else {
                low + (i as f64 + 0.5) * d
            }
        };
        Pose2::new(
            axis(r.x.0, r.x.1, cell.ix, self.delta[0], nx),
            axis(r.y.0, r.y.1, cell.iy, self.delta[1], ny),
            axis(r.theta.0, r.theta.1, cell.itheta, self.delta[2], nt),
        )
    }

    /// The cell containing `p`, if `p` lies inside some region.
    #[must_use]
    pub fn cell_of(&self, p: &Pose2) -> Option<CellId> {
        for (region, r) in self.regions.iter().enumerate() {
            if p.x < r.x.0 || p.x >= r.x.1 || p.y < r.y.0 || p.y >= r.y.1 {
                continue;
            }
            let span = r.theta.1 - r.theta.0;
            let off = theta_offset(p.theta, r.theta.0);
            if off >= span {
                continue;
            }
            let (nx, ny, nt) = self.region_dims(region);
            let clamp_idx = |v: f64, d: f64, n: u32| -> u32 {
                ((v / d).floor() as i64).clamp(0, n as i64 - 1) as u32
            };
            return Some(CellId {
                region: region as u32,
                ix: clamp_idx(p.x - r.x.0, self.delta[0], nx),
                iy: clamp_idx(p.y - r.y.0, self.delta[1], ny),
                itheta: clamp_idx(off, self.delta[2], nt),
            });
        }
        None
    }

    /// Whether `p` lies inside any region box.
    #[must_use]
    pub fn contains(&self, p: &Pose2) -> bool {
        self.cell_of(p).is_some()
    }

    /// Linear index: regions in order, theta-major then y then x within one.
    #[must_use]
    pub fn linear_index(&self, cell: CellId) -> u64 {
        let mut offset = 0u64;
        for region in 0..cell.region as usize {
            let (nx, ny, nt) = self.region_dims(region);
            offset += nx as u64 * ny as u64 * nt as u64;
        }
        let (nx, ny, _) = self.region_dims(cell.region as usize);
        offset
            + (cell.itheta as u64 * ny as u64 + cell.iy as u64) * nx as u64
            + cell.ix as u64
    }

    /// Inverse of `linear_index`.
    #[must_use]
    pub fn from_linear(&self, mut id: u64) -> Option<CellId> {
        for region in 0..self.regions.len() {
            let (nx, ny, nt) = self.region_dims(region);
            let size = nx as u64 * ny as u64 * nt as u64;
            if id < size {
                let ix = (id % nx as u64) as u32;
                let rest = id / nx as u64;
                let iy = (rest % ny as u64) as u32;
                let itheta = (rest / ny as u64) as u32;
                return Some(CellId {
                    region: region as u32,
                    ix,
                    iy,
                    itheta,
                });
            }
            id -= size;
        }
        None
    }

    /// All cells in linear order.
    pub fn cells(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.cell_count()).map(|id| self.from_linear(id).expect("id in range"))
    }

    /// Grid neighbors of a cell within its region (no theta wrap across the
    /// index seam; a full-circle region simply grows from both ends).
    #[must_use]
    pub fn neighbors(&self, cell: CellId) -> Vec<CellId> {
        let (nx, ny, nt) = self.region_dims(cell.region as usize);
        let mut out = Vec::with_capacity(6);
        let mut push = |ix: i64, iy: i64, it: i64| {
            if ix >= 0 && ix < nx as i64 && iy >= 0 && iy < ny as i64 && it >= 0 && it < nt as i64 {
                out.push(CellId {
                    region: cell.region,
                    ix: ix as u32,
                    iy: iy as u32,
                    itheta: it as u32,
                });
            }
        };
        let (x, y, t) = (cell.ix as i64, cell.iy as i64, cell.itheta as i64);
        push(x - 1, y, t);
        push(x + 1, y, t);
        push(x, y - 1, t);
        push(x, y + 1, t);
        push(x, y, t - 1);
        push(x, y, t + 1);
        out
    }

    /// Resolution warnings: a cell larger than twice the rollout convergence
    /// tolerance per axis means cell-center verification is coarser than the
    /// behavior's own terminal accuracy. Worth flagging, not fatal.
    #[must_use]
    pub fn coupling_warnings(&self) -> Vec<String> {
        let bounds = [
            ("x", self.delta[0], 2.0 * ROLLOUT_POS_TOL),
            ("y", self.delta[1], 2.0 * ROLLOUT_POS_TOL),
            ("theta", self.delta[2], 2.0 * ROLLOUT_ANG_TOL),
        ];
        bounds
            .iter()
            .filter(|(_, d, bound)| d > bound)
            .map(|(axis, d, bound)| {
                format!(
                    "roi delta.{axis} = {d} exceeds twice the rollout convergence tolerance ({bound}); \
                     cell centers are verified sparser than the behavior converges"
                )
            })
            .collect()
    }
}

/// Metric on object poses: Euclidean position distance plus weighted,
/// wrapped orientation distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseMetric {
    /// Meters per radian of orientation error.
    pub theta_weight: f64,
}

impl Default for PoseMetric {
    fn default() -> Self {
        PoseMetric {
            theta_weight: METRIC_THETA_WEIGHT,
        }
    }
}

impl PoseMetric {
    #[must_use]
    pub fn distance(&self, a: &Pose2, b: &Pose2) -> f64 {
        instrument::count_distance_eval();
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        dx.hypot(dy) + self.theta_weight * wrap_angle(a.theta - b.theta).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn two_region_roi() -> RegionOfInterest {
        RegionOfInterest {
            regions: vec![
                RoiBox {
                    x: (0.0, 0.1),
                    y: (0.0, 0.2),
                    theta: (-PI, PI),
                },
                RoiBox {
                    x: (1.0, 1.05),
                    y: (0.0, 0.05),
                    theta: (0.0, 0.5),
                },
            ],
            delta: [0.025, 0.025, PI / 2.0],
        }
    }

    #[test]
    fn dims_and_counts() {
        let roi = two_region_roi();
        assert_eq!(roi.region_dims(0), (4, 8, 4));
        // 0.5 / (pi/2) rounds down to 1 cell minimum
        assert_eq!(roi.region_dims(1), (2, 2, 1));
        assert_eq!(roi.cell_count(), 4 * 8 * 4 + 4);
    }

    #[test]
    fn linear_index_round_trips() {
        let roi = two_region_roi();
        for id in 0..roi.cell_count() {
            let cell = roi.from_linear(id).unwrap();
            assert_eq!(roi.linear_index(cell), id);
        }
        assert!(roi.from_linear(roi.cell_count()).is_none());
    }

    #[test]
    fn centers_map_back_to_their_cells() {
        let roi = two_region_roi();
        for cell in roi.cells() {
            let c = roi.center(cell);
            assert_eq!(roi.cell_of(&c), Some(cell), "center {c:?}");
        }
    }

    #[test]
    fn membership_handles_theta_wrap() {
        let roi = RegionOfInterest {
            regions: vec![RoiBox {
                x: (0.0, 1.0),
                y: (0.0, 1.0),
                theta: (3.0, 3.5), // crosses the wrap seam at pi
            }],
            delta: [0.5, 0.5, 0.25],
        };
        // 3.3 rad wraps to -2.98..., still inside the interval on the circle
        let inside = Pose2::new(0.5, 0.5, 3.3);
        assert!(roi.contains(&inside));
        assert!(!roi.contains(&Pose2::new(0.5, 0.5, 2.9)));
        assert!(!roi.contains(&Pose2::new(0.5, 0.5, 0.0)));
        let cell = roi.cell_of(&inside).unwrap();
        assert_eq!(cell.itheta, 1);
    }

    #[test]
    fn outside_positions_are_rejected() {
        let roi = two_region_roi();
        assert!(!roi.contains(&Pose2::new(0.5, 0.5, 0.0)));
        assert!(!roi.contains(&Pose2::new(-0.01, 0.05, 0.0)));
        assert!(roi.contains(&Pose2::new(1.02, 0.02, 0.25)));
    }

    #[test]
    fn neighbors_respect_region_bounds() {
        let roi = two_region_roi();
        let corner = CellId {
            region: 0,
            ix: 0,
            iy: 0,
            itheta: 0,
        };
        let n = roi.neighbors(corner);
        assert_eq!(n.len(), 3);
        let interior = CellId {
            region: 0,
            ix: 1,
            iy: 3,
            itheta: 2,
        };
        assert_eq!(roi.neighbors(interior).len(), 6);
    }

    #[test]
    fn validation_catches_bad_inputs() {
        let mut roi = two_region_roi();
        roi.delta = [0.0, 0.1, 0.1];
        assert!(matches!(roi.validate(), Err(RoiError::BadDelta(_))));

        let mut roi = two_region_roi();
        roi.regions[0].x = (1.0, 0.5);
        assert!(matches!(roi.validate(), Err(RoiError::BadBounds { .. })));

        let mut roi = two_region_roi();
        roi.regions[0].theta = (0.0, 7.0);
        assert!(matches!(
            roi.validate(),
            Err(RoiError::ThetaSpanTooWide { .. })
        ));

        assert!(two_region_roi().validate().is_ok());
    }

    #[test]
    fn coupling_warnings_fire_on_coarse_grids() {
        let fine = RegionOfInterest {
            regions: vec![],
            delta: [0.004, 0.004, 0.04],
        };
        assert!(fine.coupling_warnings().is_empty());
        let coarse = RegionOfInterest {
            regions: vec![],
            delta: [0.05, 0.004, 0.04],
        };
        let warnings = coarse.coupling_warnings();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("delta.x"));
    }

    #[test]
    fn metric_weights_wrapped_orientation() {
        let m = PoseMetric { theta_weight: 0.3 };
        let a = Pose2::new(0.0, 0.0, 3.0);
        let b = Pose2::new(0.3, 0.4, -3.0);
        // wrapped angular difference is 2*pi - 6 ~ 0.2832
        let want = 0.5 + 0.3 * (2.0 * PI - 6.0);
        assert_relative_eq!(m.distance(&a, &b), want, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn metric_is_symmetric_and_nonnegative(
            ax in -2.0..2.0f64, ay in -2.0..2.0f64, at in -4.0..4.0f64,
            bx in -2.0..2.0f64, by in -2.0..2.0f64, bt in -4.0..4.0f64,
        ) {
            let m = PoseMetric { theta_weight: 0.3 };
            let a = Pose2::new(ax, ay, at);
            let b = Pose2::new(bx, by, bt);
            let d = m.distance(&a, &b);
            prop_assert!(d >= 0.0);
            prop_assert!((d - m.distance(&b, &a)).abs() < 1e-12);
            prop_assert!(m.distance(&a, &a) == 0.0);
        }

        #[test]
        fn metric_triangle_inequality(
            ax in -1.0..1.0f64, ay in -1.0..1.0f64, at in -3.0..3.0f64,
            bx in -1.0..1.0f64, by in -1.0..1.0f64, bt in -3.0..3.0f64,
            cx in -1.0..1.0f64, cy in -1.0..1.0f64, ct in -3.0..3.0f64,
        ) {
            let m = PoseMetric { theta_weight: 0.3 };
            let a = Pose2::new(ax, ay, at);
            let b = Pose2::new(bx, by, bt);
            let c = Pose2::new(cx, cy, ct);
            prop_assert!(m.distance(&a, &c) <= m.distance(&a, &b) + m.distance(&b, &c) + 1e-9);
        }
    }
}
