//! False-data-injection signals on the secondary control input channels.
//!
//! A profile holds, for every inverter and loop, a time-ordered list of
//! non-overlapping segments `[t_start, t_end)`. Segment formulas use the
//! absolute simulation clock.

use std::fmt;

use thiserror::Error;

use crate::control::ControlLoop;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttackError {
    #[error("inverter index {index} out of range for {n} inverters")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("attack time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("segment [{t_start}, {t_end}) is empty or not finite at its start")]
    EmptySegment { t_start: f64, t_end: f64 },
    #[error("segment starting at {t_start} overlaps or precedes the previous segment ending at {prev_end}")]
    Overlap { t_start: f64, prev_end: f64 },
    #[error("non-finite coefficient in {0} segment")]
    NonFiniteCoefficient(&'static str),
    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },
    #[error("envelope check needs gamma > 0, rho > 0, horizon > 0 and at least 2 samples")]
    EnvelopeArguments,
}

/// Shape of one segment.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentKind {
    None,
    /// `c`
    Constant { value: f64 },
    /// `(a t)³ + d`
    Cubic { scale: f64, offset: f64 },
    /// `e^{r t} + d`
    Exponential { rate: f64, offset: f64 },
    /// Arithmetic over `t` with `+ − * / ^`, parentheses and `exp(·)`.
    Expr(CustomExpr),
}

impl SegmentKind {
    pub fn name(&self) -> &'static str {
        match self {
            SegmentKind::None => "none",
            SegmentKind::Constant { .. } => "constant",
            SegmentKind::Cubic { .. } => "cubic",
            SegmentKind::Exponential { .. } => "exponential",
            SegmentKind::Expr(_) => "expr",
        }
    }

    #[inline]
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            SegmentKind::None => 0.0,
            SegmentKind::Constant { value } => *value,
            SegmentKind::Cubic { scale, offset } => {
                let x = scale * t;
                x * x * x + offset
            }
            SegmentKind::Exponential { rate, offset } => (rate * t).exp() + offset,
            SegmentKind::Expr(e) => e.eval(t),
        }
    }

    fn check_finite(&self) -> Result<(), AttackError> {
        let ok = match self {
            SegmentKind::None | SegmentKind::Expr(_) => true,
            SegmentKind::Constant { value } => value.is_finite(),
            SegmentKind::Cubic { scale, offset } => scale.is_finite() && offset.is_finite(),
            SegmentKind::Exponential { rate, offset } => rate.is_finite() && offset.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(AttackError::NonFiniteCoefficient(self.name()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackSegment {
    pub t_start: f64,
    /// May be `f64::INFINITY` for an open-ended segment.
    pub t_end: f64,
    pub kind: SegmentKind,
}

impl AttackSegment {
    pub fn new(t_start: f64, t_end: f64, kind: SegmentKind) -> Result<Self, AttackError> {
        if !(t_start.is_finite() && t_start < t_end) {
            return Err(AttackError::EmptySegment { t_start, t_end });
        }
        kind.check_finite()?;
        Ok(Self { t_start, t_end, kind })
    }

    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }
}

/// Attack schedule for every inverter on both loops.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackProfile {
    frequency: Vec<Vec<AttackSegment>>,
    voltage: Vec<Vec<AttackSegment>>,
}

impl AttackProfile {
    /// Profile with no segments: identically zero.
    pub fn zero(n: usize) -> Self {
        Self { frequency: vec![Vec::new(); n], voltage: vec![Vec::new(); n] }
    }

    pub fn n_inverters(&self) -> usize {
        self.frequency.len()
    }

    pub fn is_zero(&self) -> bool {
        self.frequency.iter().chain(&self.voltage).flatten().all(|s| s.kind == SegmentKind::None)
    }

    fn lists(&self, which: ControlLoop) -> &Vec<Vec<AttackSegment>> {
        match which {
            ControlLoop::Frequency => &self.frequency,
            ControlLoop::Voltage => &self.voltage,
        }
    }

    fn check_index(&self, inverter: usize) -> Result<(), AttackError> {
        if inverter >= self.n_inverters() {
            return Err(AttackError::IndexOutOfRange { index: inverter, n: self.n_inverters() });
        }
        Ok(())
    }

    /// Appends a segment; it must start at or after the end of the last one.
    pub fn push(&mut self, inverter: usize, which: ControlLoop, segment: AttackSegment) -> Result<(), AttackError> {
        self.check_index(inverter)?;
        let list = match which {
            ControlLoop::Frequency => &mut self.frequency[inverter],
            ControlLoop::Voltage => &mut self.voltage[inverter],
        };
        if let Some(prev) = list.last() {
            if segment.t_start < prev.t_end {
                return Err(AttackError::Overlap { t_start: segment.t_start, prev_end: prev.t_end });
            }
        }
        list.push(segment);
        Ok(())
    }

    pub fn segments(&self, inverter: usize, which: ControlLoop) -> Result<&[AttackSegment], AttackError> {
        self.check_index(inverter)?;
        Ok(&self.lists(which)[inverter])
    }

    /// Value of `μ` for one inverter and loop at time `t`.
    pub fn evaluate(&self, inverter: usize, which: ControlLoop, t: f64) -> Result<f64, AttackError> {
        self.check_index(inverter)?;
        if t < 0.0 || t.is_nan() {
            return Err(AttackError::NegativeTime(t));
        }
        Ok(self.evaluate_unchecked(inverter, which, t))
    }

    #[inline]
    pub(crate) fn evaluate_unchecked(&self, inverter: usize, which: ControlLoop, t: f64) -> f64 {
        self.lists(which)[inverter]
            .iter()
            .find(|s| s.contains(t))
            .map_or(0.0, |s| s.kind.value_at(t))
    }

    /// Sorted, de-duplicated segment start/end times that are finite.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .frequency
            .iter()
            .chain(&self.voltage)
            .flatten()
            .filter(|s| s.kind != SegmentKind::None)
            .flat_map(|s| [s.t_start, s.t_end])
            .filter(|t| t.is_finite())
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Earliest start of any non-trivial segment.
    pub fn onset(&self) -> Option<f64> {
        self.frequency
            .iter()
            .chain(&self.voltage)
            .flatten()
            .filter(|s| s.kind != SegmentKind::None)
            .map(|s| s.t_start)
            .min_by(f64::total_cmp)
    }

    /// The four-inverter benchmark schedule: zero before 5 s, then constant
    /// on `[5, 8)`, cubic on `[8, 12)` and exponential on `[12, 20)`.
    pub fn standard_schedule() -> Self {
        let mut profile = Self::zero(4);
        for (which, rows) in [(ControlLoop::Frequency, &FREQUENCY_ROWS), (ControlLoop::Voltage, &VOLTAGE_ROWS)] {
            for (i, r) in rows.iter().enumerate() {
                let segs = [
                    AttackSegment::new(5.0, 8.0, SegmentKind::Constant { value: r[0] }),
                    AttackSegment::new(8.0, 12.0, SegmentKind::Cubic { scale: r[1], offset: r[2] }),
                    AttackSegment::new(12.0, 20.0, SegmentKind::Exponential { rate: r[3], offset: r[4] }),
                ];
                for s in segs {
                    profile.push(i, which, s.expect("static schedule is valid")).expect("ordered");
                }
            }
        }
        profile
    }

    /// Only the exponential column of [`standard_schedule`](Self::standard_schedule),
    /// active from `onset` onwards.
    pub fn unbounded_schedule(onset: f64, t_end: f64) -> Self {
        let mut profile = Self::zero(4);
        for (which, rows) in [(ControlLoop::Frequency, &FREQUENCY_ROWS), (ControlLoop::Voltage, &VOLTAGE_ROWS)] {
            for (i, r) in rows.iter().enumerate() {
                let s = AttackSegment::new(onset, t_end, SegmentKind::Exponential { rate: r[3], offset: r[4] })
                    .expect("valid onset");
                profile.push(i, which, s).expect("ordered");
            }
        }
        profile
    }
}

/// Per inverter: constant, cubic scale, cubic offset, exponential rate, exponential offset.
const FREQUENCY_ROWS: [[f64; 5]; 4] = [
    [0.5, 0.15, 0.7, 0.25, 0.8],
    [0.5, 0.25, 0.6, 0.2, 1.0],
    [0.23, 0.35, 0.3, 0.15, 1.4],
    [0.6, 0.15, 0.7, 0.3, 0.8],
];

const VOLTAGE_ROWS: [[f64; 5]; 4] = [
    [2.0, 0.35, 2.1, 0.3, 3.2],
    [1.0, 0.45, 1.0, 0.25, 3.5],
    [2.0, 0.25, 2.1, 0.35, 2.6],
    [1.5, 0.15, 1.5, 0.45, 1.7],
];

/// `μ_i(t)` for one inverter and loop.
pub fn evaluate(profile: &AttackProfile, inverter: usize, which: ControlLoop, t: f64) -> Result<f64, AttackError> {
    profile.evaluate(inverter, which, t)
}

/// Sampled check of `|μ(t)| ≤ γ e^{ρ t}` on a uniform grid of `samples`
/// points over `[0, horizon]`, for every inverter and both loops.
///
/// This is a dense sampled test, not a proof of the bound.
pub fn check_envelope(
    profile: &AttackProfile,
    gamma: f64,
    rho: f64,
    horizon: f64,
    samples: usize,
) -> Result<bool, AttackError> {
    if !(gamma > 0.0 && rho > 0.0 && horizon > 0.0 && horizon.is_finite()) || samples < 2 {
        return Err(AttackError::EnvelopeArguments);
    }
    let last = (samples - 1) as f64;
    for k in 0..samples {
        let t = horizon * k as f64 / last;
        let bound = gamma * (rho * t).exp();
        for i in 0..profile.n_inverters() {
            for which in ControlLoop::BOTH {
                let mu = profile.evaluate_unchecked(i, which, t);
                if !(mu.abs() <= bound) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Corrupted input `ū = u + μ`.
#[inline]
pub fn inject(u: f64, mu: f64) -> f64 {
    u + mu
}

const MAX_EXPR_LEN: usize = 512;
const MAX_EXPR_DEPTH: usize = 64;

/// A parsed custom attack formula together with its source text.
#[derive(Clone)]
pub struct CustomExpr {
    source: String,
    root: Node,
}

impl PartialEq for CustomExpr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl fmt::Debug for CustomExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomExpr({:?})", self.source)
    }
}

impl CustomExpr {
    pub fn parse(source: &str) -> Result<Self, AttackError> {
        if source.len() > MAX_EXPR_LEN {
            return Err(AttackError::Expression { column: MAX_EXPR_LEN, message: "expression too long".into() });
        }
        let mut parser = Parser { chars: source.char_indices().collect(), pos: 0, depth: 0 };
        let root = parser.expr()?;
        parser.skip_ws();
        if let Some(&(col, c)) = parser.chars.get(parser.pos) {
            return Err(AttackError::Expression { column: col + 1, message: format!("unexpected `{c}`") });
        }
        Ok(Self { source: source.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.root.eval(t)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    T,
    Neg(Box<Node>),
    Exp(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl Node {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::T => t,
            Node::Neg(a) => -a.eval(t),
            Node::Exp(a) => a.eval(t).exp(),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(t), b.eval(t));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
        }
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, AttackError> {
        let column = self.chars.get(self.pos).map_or_else(|| self.chars.last().map_or(0, |c| c.0 + 1), |c| c.0) + 1;
        Err(AttackError::Expression { column, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.1.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), AttackError> {
        self.depth += 1;
        if self.depth > MAX_EXPR_DEPTH {
            return self.err("expression nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Node, AttackError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some('+') => Op::Add,
                Some('-') => Op::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, AttackError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some('*') => Op::Mul,
                Some('/') => Op::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, AttackError> {
        self.enter()?;
        let node = if self.eat('-') {
            Node::Neg(Box::new(self.unary()?))
        } else if self.eat('+') {
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(node)
    }

    fn power(&mut self) -> Result<Node, AttackError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, AttackError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|c| c.1.is_ascii_alphanumeric() || c.1 == '_') {
                    self.pos += 1;
                }
                let ident: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                match ident.as_str() {
                    "t" => Ok(Node::T),
                    "exp" => {
                        if !self.eat('(') {
                            return self.err("expected `(` after exp");
                        }
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return self.err("expected `)`");
                        }
                        Ok(Node::Exp(Box::new(arg)))
                    }
                    _ => {
                        self.pos = start;
                        self.err(format!("unknown identifier `{ident}` (allowed: t, exp)"))
                    }
                }
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn number(&mut self) -> Result<Node, AttackError> {
        let start = self.pos;
        let at = |p: &Self, i: usize| p.chars.get(i).map(|c| c.1);
        while at(self, self.pos).is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(at(self, self.pos), Some('e' | 'E')) {
            let mut look = self.pos + 1;
            if matches!(at(self, look), Some('+' | '-')) {
                look += 1;
            }
            if at(self, look).is_some_and(|c| c.is_ascii_digit()) {
                self.pos = look;
                while at(self, self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Num(v)),
            Err(_) => {
                self.pos = start;
                self.err(format!("invalid number `{text}`"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn standard_schedule_cells() {
        let p = AttackProfile::standard_schedule();
        assert_eq!(p.evaluate(2, ControlLoop::Frequency, 6.0).unwrap(), 0.23);
        let v = p.evaluate(1, ControlLoop::Voltage, 10.0).unwrap();
        assert!((v - 92.125).abs() < 1e-12);
        let f = p.evaluate(0, ControlLoop::Frequency, 13.0).unwrap();
        assert!((f - ((0.25f64 * 13.0).exp() + 0.8)).abs() < 1e-12);
        assert!((f - 26.59).abs() < 5e-3);
        for i in 0..4 {
            for which in ControlLoop::BOTH {
                assert_eq!(p.evaluate(i, which, 2.0).unwrap(), 0.0);
                assert_eq!(p.evaluate(i, which, 4.999_999).unwrap(), 0.0);
                assert_eq!(p.evaluate(i, which, 20.0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn segments_are_left_closed() {
        let p = AttackProfile::standard_schedule();
        assert_eq!(p.evaluate(0, ControlLoop::Frequency, 5.0).unwrap(), 0.5);
        // At t = 8 the cubic segment is active.
        let v = p.evaluate(0, ControlLoop::Frequency, 8.0).unwrap();
        assert!((v - ((0.15f64 * 8.0).powi(3) + 0.7)).abs() < 1e-12);
        let v = p.evaluate(3, ControlLoop::Voltage, 12.0).unwrap();
        assert!((v - ((0.45f64 * 12.0).exp() + 1.7)).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_inverter_errors() {
        let p = AttackProfile::standard_schedule();
        assert_eq!(p.evaluate(4, ControlLoop::Voltage, 6.0), Err(AttackError::IndexOutOfRange { index: 4, n: 4 }));
        assert!(matches!(p.evaluate(0, ControlLoop::Voltage, -1.0), Err(AttackError::NegativeTime(_))));
    }

    #[test]
    fn overlapping_segments_rejected() {
        let mut p = AttackProfile::zero(1);
        p.push(0, ControlLoop::Frequency, AttackSegment::new(1.0, 3.0, SegmentKind::Constant { value: 1.0 }).unwrap())
            .unwrap();
        let err = p.push(0, ControlLoop::Frequency, AttackSegment::new(2.0, 4.0, SegmentKind::None).unwrap());
        assert!(matches!(err, Err(AttackError::Overlap { .. })));
        assert!(AttackSegment::new(3.0, 3.0, SegmentKind::None).is_err());
    }

    #[test]
    fn envelope_cases() {
        assert!(check_envelope(&AttackProfile::zero(4), 0.1, 0.1, 20.0, 100).unwrap());
        assert!(check_envelope(&AttackProfile::standard_schedule(), 5.0, 0.5, 20.0, 10_000).unwrap());
        let mut p = AttackProfile::zero(1);
        p.push(0, ControlLoop::Voltage, AttackSegment::new(0.0, f64::INFINITY, SegmentKind::Exponential { rate: 0.45, offset: 1.7 }).unwrap())
            .unwrap();
        assert!(check_envelope(&p, 3.0, 0.45, 20.0, 10_000).unwrap());
        let mut p = AttackProfile::zero(1);
        let e = CustomExpr::parse("exp(t^2)").unwrap();
        p.push(0, ControlLoop::Frequency, AttackSegment::new(0.0, f64::INFINITY, SegmentKind::Expr(e)).unwrap()).unwrap();
        assert!(!check_envelope(&p, 5.0, 0.5, 3.0, 1000).unwrap());
        assert!(check_envelope(&p, 5.0, 0.5, 20.0, 1).is_err());
    }

    #[test]
    fn inject_examples() {
        assert_eq!(inject(3.25, 0.0), 3.25);
        let mu = AttackProfile::standard_schedule().evaluate(0, ControlLoop::Frequency, 13.0).unwrap();
        assert!((inject(1.0, mu) - 27.59).abs() < 5e-3);
    }

    #[test]
    fn expression_parsing() {
        let cases: [(&str, f64, f64); 9] = [
            ("t", 2.0, 2.0),
            ("-t^2", 3.0, -9.0),
            ("2^3^2", 0.0, 512.0),
            ("(0.45*t)^3 + 1", 10.0, 92.125),
            ("exp(0.25*t)+0.8", 13.0, (0.25f64 * 13.0).exp() + 0.8),
            ("1e-1 * t", 5.0, 0.5),
            ("2.5E+1/ 5", 0.0, 5.0),
            ("-(t - 1) * -2", 4.0, 6.0),
            ("  3  ", 9.0, 3.0),
        ];
        for (src, t, expected) in cases {
            let e = CustomExpr::parse(src).unwrap();
            assert!((e.eval(t) - expected).abs() < 1e-12, "{src}");
        }
        for bad in ["", "t +", "sin(t)", "(t", "t)", "3..2", "x", "exp t"] {
            assert!(CustomExpr::parse(bad).is_err(), "{bad}");
        }
        let deep = format!("{}t{}", "(".repeat(100), ")".repeat(100));
        assert!(CustomExpr::parse(&deep).is_err());
    }

    #[test]
    fn boundaries_and_onset() {
        let p = AttackProfile::standard_schedule();
        assert_eq!(p.boundaries(), vec![5.0, 8.0, 12.0, 20.0]);
        assert_eq!(p.onset(), Some(5.0));
        assert_eq!(AttackProfile::zero(3).onset(), None);
        let u = AttackProfile::unbounded_schedule(5.0, f64::INFINITY);
        assert_eq!(u.boundaries(), vec![5.0]);
        let v = u.evaluate(2, ControlLoop::Voltage, 6.0).unwrap();
        assert!((v - ((0.35f64 * 6.0).exp() + 2.6)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn injection_is_additive(u in -1e6f64..1e6, a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let lhs = inject(inject(u, a), b);
            let rhs = inject(u, a + b);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (u.abs() + a.abs() + b.abs()).max(1.0));
        }

        #[test]
        fn evaluation_is_deterministic_and_zero_outside(t in 0.0f64..40.0, i in 0usize..4) {
            let p = AttackProfile::standard_schedule();
            for which in ControlLoop::BOTH {
                let a = p.evaluate(i, which, t).unwrap();
                let b = p.evaluate(i, which, t).unwrap();
                prop_assert_eq!(a.to_bits(), b.to_bits());
                if !(5.0..20.0).contains(&t) {
                    prop_assert_eq!(a, 0.0);
                }
            }
        }

        #[test]
        fn cubic_expression_matches_builtin(a in -1.0f64..1.0, d in -5.0f64..5.0, t in 0.0f64..20.0) {
            let e = CustomExpr::parse(&format!("({a:e}*t)^3 + {d:e}")).unwrap();
            let k = SegmentKind::Cubic { scale: a, offset: d };
            let (x, y) = (e.eval(t), k.value_at(t));
            prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }
}
