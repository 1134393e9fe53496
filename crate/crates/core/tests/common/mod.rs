#![allow(dead_code)]

use std::sync::Arc;

use geostat::autodiff::Jet;
use geostat::charts::{ChartedMetric, ChartedScalar, MetricField, Point, ScalarField};
use geostat::solutions::{
    lambda_family, schwarzschild, weyl_system, Rod, SchwarzschildChart, SchwarzschildSpec, WeylSpec,
};
use geostat::statics::{
    flat_vacuum, from_pseudo_newtonian, to_pseudo_newtonian, PhysicalConstants, StaticSystem,
};

/// A named static system.
pub struct Entry {
    pub name: String,
    pub system: StaticSystem,
}

pub fn two_rods() -> WeylSpec {
    WeylSpec::new(vec![
        Rod {
            center_z: -4.0,
            half_length: 1.0,
        },
        Rod {
            center_z: 4.0,
            half_length: 2.0,
        },
    ])
}

/// Every exact solution the crate ships, in each chart.
pub fn catalog() -> Vec<Entry> {
    let k = PhysicalConstants::geometric();
    let mut out = vec![Entry {
        name: "flat".into(),
        system: flat_vacuum(k),
    }];
    for m in [0.5, 1.0, 2.0] {
        for chart in [
            SchwarzschildChart::Isotropic,
            SchwarzschildChart::SchwarzschildArea,
            SchwarzschildChart::GammaHarmonic,
        ] {
            let spec = SchwarzschildSpec::new(m, [0.3, -0.2, 0.1], chart);
            out.push(Entry {
                name: format!("schwarzschild-{chart:?}-m{m}"),
                system: schwarzschild(&spec, &k).unwrap(),
            });
        }
    }
    let weyl = weyl_system(&two_rods(), &k).unwrap();
    out.push(Entry {
        name: "weyl-two-rods".into(),
        system: from_pseudo_newtonian(&weyl),
    });
    let family = lambda_family(1.0, &[1e-2]).unwrap();
    out.push(Entry {
        name: "lambda-1e-2".into(),
        system: from_pseudo_newtonian(&family.members[0].system),
    });
    out
}

/// One component of a metric as a scalar field.
pub struct Component {
    pub metric: Arc<dyn MetricField>,
    pub i: usize,
    pub j: usize,
}

impl ScalarField for Component {
    fn value(&self, p: &Point) -> f64 {
        self.metric.components(p)[self.i][self.j]
    }

    fn jet(&self, p: &Point) -> Jet<3> {
        self.metric.jet(p)[self.i][self.j]
    }
}

/// The six independent components of `g` as charted scalars.
pub fn components(g: &ChartedMetric) -> Vec<ChartedScalar> {
    let mut out = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            out.push(ChartedScalar::new(
                g.chart.clone(),
                Arc::new(Component {
                    metric: g.field.clone(),
                    i,
                    j,
                }),
            ));
        }
    }
    out
}

/// Every scalar of a system: lapse, potential, and all metric components of
/// `g` and `γ`.
pub fn scalars(s: &StaticSystem) -> Vec<(String, ChartedScalar)> {
    let p = to_pseudo_newtonian(s).unwrap();
    let mut out = vec![
        ("N".to_string(), s.n.clone()),
        ("U".to_string(), p.u.clone()),
    ];
    for (k, c) in components(&s.g).into_iter().enumerate() {
        out.push((format!("g{k}"), c));
    }
    for (k, c) in components(&p.gamma).into_iter().enumerate() {
        out.push((format!("gamma{k}"), c));
    }
    out
}
