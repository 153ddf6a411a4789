use serde::{Deserialize, Serialize};

use super::EvalError;

pub const PATCH_SIZE: u32 = 16;
pub const CONV_RATIO: u32 = 16;
pub const TABLE_RESOLUTIONS: [u32; 4] = [512, 640, 1024, 1280];

/// Visual tokens per page and bases per token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenBudget {
    pub resolution: u32,
    pub patch: u32,
    pub conv_ratio: u32,
    pub tokens_per_page: u64,
    pub pages: u64,
    pub bases: u64,
    pub compression: f64,
}

/// `T = (res/16)^2 / 16` tokens per page, compression `N / (P*T)`.
pub fn token_budget(resolution: u32, pages: u64, bases: u64) -> Result<TokenBudget, EvalError> {
    if resolution == 0 || !resolution.is_multiple_of(PATCH_SIZE) {
        return Err(EvalError::UnsupportedResolution(resolution));
    }
    let t0 = u64::from(resolution / PATCH_SIZE).pow(2);
    if t0 % u64::from(CONV_RATIO) != 0 {
        return Err(EvalError::UnsupportedResolution(resolution));
    }
    if pages == 0 {
        return Err(EvalError::InvalidInput("page count must be positive".into()));
    }
    let t = t0 / u64::from(CONV_RATIO);
    Ok(TokenBudget {
        resolution,
        patch: PATCH_SIZE,
        conv_ratio: CONV_RATIO,
        tokens_per_page: t,
        pages,
        bases,
        compression: bases as f64 / (pages * t) as f64,
    })
}
