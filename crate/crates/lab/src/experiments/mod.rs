//! Built-in experiments, grouped by the core module they exercise.

mod algebra;
mod moments;
mod pivot;
mod structure;

use crate::registry::Registry;

pub fn register_all(r: &mut Registry) {
    r.register(Box::new(algebra::VvCount));
    r.register(Box::new(moments::EnergySpectrum));
    r.register(Box::new(moments::DxTimes));
    r.register(Box::new(moments::DilateWindow));
    r.register(Box::new(pivot::Pivot));
    r.register(Box::new(pivot::Closure));
    r.register(Box::new(pivot::Span));
    r.register(Box::new(algebra::HisCheck));
    r.register(Box::new(algebra::PdaVv));
    r.register(Box::new(algebra::Kloosterman));
    r.register(Box::new(moments::Bkt));
    r.register(Box::new(structure::Plunnecke));
    r.register(Box::new(structure::Bsg));
    r.register(Box::new(structure::Structure));
    r.register(Box::new(moments::FourSetScan));
    r.register(Box::new(algebra::PdaThresholdScan));
}

fn cell<T: ToString>(v: T) -> String {
    v.to_string()
}

fn all(mut it: impl Iterator<Item = bool>) -> bool {
    it.all(|b| b)
}
