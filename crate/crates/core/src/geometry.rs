use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2::new(T::zero(), T::zero())
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    pub fn is_zero(self) -> bool {
        self.x == T::zero() && self.y == T::zero()
    }

    /// Shrinks the vector to `max_len` if it is longer.
    pub fn clamp_length(self, max_len: T) -> Self {
        let len = self.norm();
        if len > max_len && len > T::zero() {
            self * (max_len / len)
        } else {
            self
        }
    }

    pub fn cast<U: Scalar>(self) -> Vec2<U> {
        Vec2::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> AddAssign for Vec2<T> {
    fn add_assign(&mut self, rhs: Self) {
        self.x = self.x + rhs.x;
        self.y = self.y + rhs.y;
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle, `min` inclusive and `max` exclusive for sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect<T> {
    pub min: Vec2<T>,
    pub max: Vec2<T>,
}

impl<T: Scalar> Rect<T> {
    pub fn new(min: Vec2<T>, max: Vec2<T>) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > T::zero() && self.height() > T::zero())
            || !self.area().is_finite()
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_rect(&self, other: &Rect<T>) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn corners(&self) -> [Vec2<T>; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    pub fn to_polygon(&self) -> Polygon<T> {
        Polygon::new(self.corners().to_vec())
    }

    pub fn center(&self) -> Vec2<T> {
        (self.min + self.max) * T::lit(0.5)
    }

    pub fn cast<U: Scalar>(&self) -> Rect<U> {
        Rect::new(self.min.cast(), self.max.cast())
    }
}

/// Simple polygon (convex or not), vertices in either winding order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polygon<T> {
    pub vertices: Vec<Vec2<T>>,
}

impl<T: Scalar> Polygon<T> {
    pub fn new(vertices: Vec<Vec2<T>>) -> Self {
        Polygon { vertices }
    }

    pub fn cast<U: Scalar>(&self) -> Polygon<U> {
        Polygon::new(self.vertices.iter().map(|v| v.cast()).collect())
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2<T>, Vec2<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Even-odd ray casting. Points exactly on an edge may land either way.
    pub fn contains(&self, p: Vec2<T>) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn area(&self) -> T {
        shoelace_area(&self.vertices)
    }

    /// Shortest distance from `p` to the filled polygon (zero inside).
    pub fn distance_to(&self, p: Vec2<T>) -> T {
        if self.contains(p) {
            return T::zero();
        }
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(T::infinity(), T::min)
    }

    /// Farthest distance from `p` to any point of the polygon, always at a vertex.
    pub fn max_distance_to(&self, p: Vec2<T>) -> T {
        self.vertices
            .iter()
            .map(|v| v.distance(p))
            .fold(T::zero(), T::max)
    }

    pub fn intersects_rect(&self, rect: &Rect<T>) -> bool {
        if self.vertices.iter().any(|&v| rect.contains(v)) {
            return true;
        }
        if rect.corners().iter().any(|&c| self.contains(c)) {
            return true;
        }
        let rp = rect.to_polygon();
        self.edges()
            .any(|(a, b)| rp.edges().any(|(c, d)| segments_intersect(a, b, c, d)))
    }
}

pub fn segment_distance<T: Scalar>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> T {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == T::zero() {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one());
    p.distance(a + ab * t)
}

pub fn segments_intersect<T: Scalar>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>, d: Vec2<T>) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    let zero = T::zero();
    if ((o1 > zero && o2 < zero) || (o1 < zero && o2 > zero))
        && ((o3 > zero && o4 < zero) || (o3 < zero && o4 > zero))
    {
        return true;
    }
    let on_segment = |p: Vec2<T>, q: Vec2<T>, r: Vec2<T>| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (o1 == zero && on_segment(a, b, c))
        || (o2 == zero && on_segment(a, b, d))
        || (o3 == zero && on_segment(c, d, a))
        || (o4 == zero && on_segment(c, d, b))
}

pub fn shoelace_area<T: Scalar>(vertices: &[Vec2<T>]) -> T {
    let n = vertices.len();
    if n < 3 {
        return T::zero();
    }
    let twice = (0..n).fold(T::zero(), |acc, i| {
        acc + vertices[i].cross(vertices[(i + 1) % n])
    });
    (twice / T::lit(2.0)).abs()
}

/// Monotone-chain convex hull, counter-clockwise, collinear points dropped.
pub fn convex_hull<T: Scalar>(points: &[Vec2<T>]) -> Vec<Vec2<T>> {
    let mut pts: Vec<Vec2<T>> = points.to_vec();
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.y.partial_cmp(&b.y).unwrap_or(std::cmp::Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }

    let turn = |o: Vec2<T>, a: Vec2<T>, b: Vec2<T>| (a - o).cross(b - o);
    let mut hull: Vec<Vec2<T>> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero()
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

pub fn convex_hull_area<T: Scalar>(points: &[Vec2<T>]) -> T {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        T::zero()
    } else {
        shoelace_area(&hull)
    }
}
