/// Shortest-form-independent rendering with 17 significant digits, so that
/// every `f64` round-trips and reruns produce identical bytes.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        // normalise -0
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [1.0, -0.1, std::f64::consts::PI, 1e-300, 123_456_789.123_456_79] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt17(-0.0), fmt17(0.0));
    }
}
