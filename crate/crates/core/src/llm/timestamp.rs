use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

/// How far past the end of a transcript a timestamp may point before it is
/// treated as fabricated.
pub const FABRICATION_SLACK_S: f64 = 60.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimestampRejection {
    #[error("{0:?} is not an H:MM:SS timestamp")]
    Format(String),
    #[error("{value} is {seconds} s into a {duration:.0} s transcript")]
    BeyondEnd { value: String, seconds: u32, duration: f64 },
    #[error("transcript has no duration to check against")]
    NoDuration,
}

fn pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(\d{1,2}):([0-5]\d):([0-5]\d)$").expect("valid regex"))
}

/// Parses `H:MM:SS` into whole seconds.
pub fn parse_timestamp(value: &str) -> Result<u32, TimestampRejection> {
    let caps = pattern()
        .captures(value.trim())
        .ok_or_else(|| TimestampRejection::Format(value.to_string()))?;
    let n = |i: usize| caps[i].parse::<u32>().expect("digits");
    Ok(n(1) * 3600 + n(2) * 60 + n(3))
}

/// Formats seconds as `H:MM:SS` (hour unpadded), truncating fractions.
pub fn format_timestamp(seconds: f64) -> String {
    let s = seconds.max(0.0) as u64;
    format!("{}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
}

/// Parses a model-supplied timestamp and rejects values that point more than
/// [`FABRICATION_SLACK_S`] past the end of the transcript.
pub fn validate_timestamp(value: &str, transcript_duration: f64) -> Result<f64, TimestampRejection> {
    if transcript_duration.is_nan() || transcript_duration <= 0.0 {
        return Err(TimestampRejection::NoDuration);
    }
    let seconds = parse_timestamp(value)?;
    if f64::from(seconds) > transcript_duration + FABRICATION_SLACK_S {
        return Err(TimestampRejection::BeyondEnd {
            value: value.to_string(),
            seconds,
            duration: transcript_duration,
        });
    }
    Ok(f64::from(seconds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_timestamp_in_a_55_minute_lecture() {
        assert_eq!(validate_timestamp("0:15:42", 3300.0), Ok(942.0));
    }

    #[test]
    fn far_past_the_end_is_fabricated() {
        assert!(matches!(
            validate_timestamp("9:59:59", 3300.0),
            Err(TimestampRejection::BeyondEnd { seconds: 35_999, .. })
        ));
        assert!(validate_timestamp("0:55:59", 3300.0).is_ok());
        assert!(validate_timestamp("0:56:01", 3300.0).is_err());
    }

    #[test]
    fn two_groups_are_not_enough() {
        assert_eq!(
            validate_timestamp("15:42", 3300.0),
            Err(TimestampRejection::Format("15:42".into()))
        );
        assert!(parse_timestamp("0:61:00").is_err());
        assert!(parse_timestamp("H:MM:SS").is_err());
    }

    #[test]
    fn format_round_trips() {
        for s in [0u32, 20, 942, 3599, 3600, 35_999] {
            assert_eq!(parse_timestamp(&format_timestamp(f64::from(s))), Ok(s));
        }
        assert_eq!(format_timestamp(942.9), "0:15:42");
    }
}
