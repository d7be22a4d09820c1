//! Baseline interceptor: delivers every carrier untouched.

use crate::error::Result;
use crate::qcore::Label;
use crate::runtime::{EveCtx, Interceptor};

#[derive(Debug, Default)]
pub struct PassiveInterceptor;

impl Interceptor for PassiveInterceptor {
    fn on_transit(&mut self, ctx: &mut EveCtx) -> Result<Label> {
        Ok(ctx.carrier.clone().expect("transit carries a subsystem"))
    }
}
