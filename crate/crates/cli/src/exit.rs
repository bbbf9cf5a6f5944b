use std::fmt;

use lj_homographic::Error as CoreError;

pub const PASS: u8 = 0;
pub const FAIL: u8 = 1;
pub const INVALID: u8 = 2;
pub const SEARCH: u8 = 3;

/// An error carrying its own exit status.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl Exit {
    pub fn invalid(message: String) -> Self {
        Self {
            code: INVALID,
            message,
        }
    }
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

/// Exit status for an error raised anywhere below `main`.
pub fn code_of(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Exit>() {
        return e.code;
    }
    match err.downcast_ref::<CoreError>() {
        Some(
            CoreError::SearchFailure { .. }
            | CoreError::IntegrationFailure { .. }
            | CoreError::Admissibility { .. },
        ) => SEARCH,
        _ => INVALID,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_codes() {
        let search = anyhow::Error::from(CoreError::SearchFailure {
            what: "lambda_0",
            limit: 1e6,
        });
        let domain = anyhow::Error::from(CoreError::Domain("x".into()));
        let integ = anyhow::Error::from(CoreError::IntegrationFailure {
            time: 1.0,
            reason: "y".into(),
        });
        assert_eq!(code_of(&search), SEARCH);
        assert_eq!(code_of(&integ), SEARCH);
        assert_eq!(code_of(&domain), INVALID);
        assert_eq!(code_of(&search.context("while sweeping")), SEARCH);
        assert_eq!(
            code_of(
                &Exit {
                    code: FAIL,
                    message: String::new()
                }
                .into()
            ),
            FAIL
        );
    }
}
