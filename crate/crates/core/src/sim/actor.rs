use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::geometry::{bearing_deg, EnuPoint, Pose};

use super::terrain::Terrain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActorKind {
    Car,
    Cyclist,
    Boat,
}

/// Foreground object driven along a waypoint polyline at constant speed.
/// Looping actors close the polyline back to the first waypoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actor {
    pub id: u32,
    pub kind: ActorKind,
    pub path: Vec<EnuPoint>,
    pub speed: f64,
    #[serde(rename = "loop", default)]
    pub looped: bool,
    /// Arc length travelled from the first waypoint, wrapped for loops.
    #[serde(default)]
    pub progress: f64,
}

impl Actor {
    pub fn new(id: u32, kind: ActorKind, path: Vec<EnuPoint>, speed: f64, looped: bool) -> Result<Self> {
        let actor = Actor {
            id,
            kind,
            path,
            speed,
            looped,
            progress: 0.0,
        };
        actor.validate()?;
        Ok(actor)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("actors[{}].{name}", self.id);
        if self.path.len() < 2 {
            return Err(Error::invalid(field("path"), "needs at least 2 waypoints"));
        }
        for (i, p) in self.path.iter().enumerate() {
            p.validate(&field(&format!("path[{i}]")))?;
        }
        ensure_positive(&field("speed"), self.speed)?;
        ensure_finite(&field("progress"), self.progress)?;
        if self.path_length() <= 0.0 {
            return Err(Error::invalid(field("path"), "has zero length"));
        }
        Ok(())
    }

    /// Boats must stay on water cells when the terrain carries water flags.
    pub fn validate_on(&self, terrain: &Terrain) -> Result<()> {
        if self.kind != ActorKind::Boat || !terrain.has_water() {
            return Ok(());
        }
        let step = terrain.cell_size() / 4.0;
        for (a, b) in self.segments() {
            let len = a.horizontal_distance(&b);
            let n = (len / step).ceil().max(1.0) as usize;
            for k in 0..=n {
                let p = a.lerp(&b, k as f64 / n as f64);
                if !terrain.is_water(p.east, p.north) {
                    return Err(Error::invalid(
                        format!("actors[{}].path", self.id),
                        format!("boat leaves water at ({:.2}, {:.2})", p.east, p.north),
                    ));
                }
            }
        }
        Ok(())
    }

    fn segments(&self) -> impl Iterator<Item = (EnuPoint, EnuPoint)> + '_ {
        let closing = self.looped.then(|| (self.path[self.path.len() - 1], self.path[0]));
        self.path.windows(2).map(|w| (w[0], w[1])).chain(closing)
    }

    /// Total arc length; includes the closing segment for loops.
    pub fn path_length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(&b)).sum()
    }

    /// Position and heading after travelling `s` metres from the start.
    pub fn locate(&self, s: f64) -> (EnuPoint, f64) {
        let mut remaining = s.max(0.0);
        let mut heading = 0.0;
        let mut last = self.path[0];
        for (a, b) in self.segments() {
            let len = a.distance(&b);
            if len == 0.0 {
                continue;
            }
            heading = bearing_deg(b.east - a.east, b.north - a.north);
            if remaining <= len {
                return (a.lerp(&b, remaining / len), heading);
            }
            remaining -= len;
            last = b;
        }
        (last, heading)
    }

    fn wrap(&self, s: f64) -> f64 {
        let total = self.path_length();
        if self.looped {
            s.rem_euclid(total)
        } else {
            s.min(total)
        }
    }

    pub fn pose(&self) -> Pose {
        let (position, yaw) = self.locate(self.progress);
        Pose {
            position,
            yaw,
            gimbal_pitch: 0.0,
        }
    }

    /// Position `t` seconds after the current state, without mutating it.
    pub fn position_after(&self, t: f64) -> EnuPoint {
        self.locate(self.wrap(self.progress + self.speed * t)).0
    }
}

/// Advances an actor by `speed * dt` of arc length. Non-looping actors stop
/// at the last waypoint.
pub fn follow_path(actor: &Actor, dt: f64) -> Actor {
    Actor {
        progress: actor.wrap(actor.progress + actor.speed * dt),
        ..actor.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_path(looped: bool) -> Actor {
        Actor::new(
            1,
            ActorKind::Car,
            vec![
                EnuPoint::new(0.0, 0.0, 0.0),
                EnuPoint::new(1.0, 0.0, 0.0),
                EnuPoint::new(1.0, 10.0, 0.0),
            ],
            5.0,
            looped,
        )
        .unwrap()
    }

    #[test]
    fn straight_step() {
        let a = Actor::new(
            2,
            ActorKind::Cyclist,
            vec![EnuPoint::ORIGIN, EnuPoint::new(0.0, 100.0, 0.0)],
            5.0,
            false,
        )
        .unwrap();
        let b = follow_path(&a, 0.05);
        assert_eq!(b.pose().position, EnuPoint::new(0.0, 0.25, 0.0));
        assert_eq!(b.pose().yaw, 0.0);
    }

    #[test]
    fn corner_conserves_arc_length() {
        let mut a = l_path(false);
        a.progress = 0.9;
        let b = follow_path(&a, 0.05);
        let p = b.pose().position;
        // 0.1 m to the corner then 0.15 m north
        assert!((p.east - 1.0).abs() < 1e-12);
        assert!((p.north - 0.15).abs() < 1e-12);
        assert_eq!(b.pose().yaw, 0.0);
        assert!((b.progress - 1.15).abs() < 1e-12);
    }

    #[test]
    fn terminal_clamp() {
        let mut a = l_path(false);
        for _ in 0..200 {
            a = follow_path(&a, 0.05);
        }
        assert_eq!(a.pose().position, EnuPoint::new(1.0, 10.0, 0.0));
        let before = a.clone();
        a = follow_path(&a, 0.05);
        assert_eq!(a, before);
    }

    #[test]
    fn loop_returns_to_start() {
        // lap: 1 + 10 + hypot(1, 10)
        let mut a = l_path(true);
        a.speed = a.path_length() / 2.0;
        let start = a.pose();
        for _ in 0..40 {
            a = follow_path(&a, 0.05);
        }
        let end = a.pose();
        assert!(end.position.distance(&start.position) < 1e-9);
        assert!(a.progress < 1e-9 || (a.path_length() - a.progress) < 1e-9);
    }

    #[test]
    fn displacement_never_exceeds_speed() {
        let mut a = l_path(true);
        a.speed = 7.3;
        let mut prev = a.pose().position;
        for _ in 0..500 {
            a = follow_path(&a, 0.05);
            let p = a.pose().position;
            assert!(p.distance(&prev) <= a.speed * 0.05 + 1e-12);
            prev = p;
        }
    }

    #[test]
    fn invalid_actors() {
        assert!(Actor::new(1, ActorKind::Car, vec![EnuPoint::ORIGIN], 1.0, false).is_err());
        assert!(Actor::new(1, ActorKind::Car, vec![EnuPoint::ORIGIN, EnuPoint::ORIGIN], 1.0, false).is_err());
        assert!(Actor::new(
            1,
            ActorKind::Car,
            vec![EnuPoint::ORIGIN, EnuPoint::new(1.0, 0.0, 0.0)],
            0.0,
            false
        )
        .is_err());
    }

    #[test]
    fn boats_stay_on_water() {
        let terrain = Terrain::flat(0.0, 0.0, 10.0, 3, 2, 0.0)
            .unwrap()
            .with_water(vec![true, false])
            .unwrap();
        let wet = Actor::new(
            3,
            ActorKind::Boat,
            vec![EnuPoint::new(1.0, 1.0, 0.0), EnuPoint::new(9.0, 9.0, 0.0)],
            2.0,
            false,
        )
        .unwrap();
        assert!(wet.validate_on(&terrain).is_ok());
        let dry = Actor {
            path: vec![EnuPoint::new(1.0, 1.0, 0.0), EnuPoint::new(19.0, 9.0, 0.0)],
            ..wet
        };
        assert!(dry.validate_on(&terrain).is_err());
    }
}
