//! Date-indexed series and panels on a Monday–Friday calendar.

pub mod calendar;
mod frame;
pub mod transforms;

pub use frame::{align, Frame, FrameView, Series};
pub use transforms::{EwmaParam, TransformSpec};
