//! TOML run configuration.
//!
//! Every key is optional; missing keys take the benchmark defaults. Unknown keys are
//! rejected. Field checks report the line of the offending value, cross-field checks
//! the line of the section header.

use std::collections::HashMap;
use std::str::FromStr;

use cbfem::contracts::{Provision, Window};
use cbfem::mms::{ForcingMode, MmsCase, MmsConfig};
use cbfem::{BondContract, ElementOrder, MarketParams, NewtonConfig};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    P1,
    P2,
}

impl From<Order> for ElementOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::P1 => ElementOrder::P1,
            Order::P2 => ElementOrder::P2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Forcing {
    Load,
    Nodal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvisionConfig {
    pub enabled: bool,
    pub price: f64,
    pub window: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractConfig {
    pub face_value: f64,
    pub coupon: f64,
    pub coupon_times: Vec<f64>,
    pub conversion_ratio: f64,
    pub maturity: f64,
    pub call: ProvisionConfig,
    pub put: ProvisionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketConfig {
    pub r: f64,
    pub r_c: f64,
    pub sigma: f64,
    pub s_int: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericsConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_elements: usize,
    pub order: Order,
    pub n_t: usize,
    pub theta: f64,
    pub rho: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
}

/// Mesh sizes for `converge` and `compare-fdm`; each run uses `n_t = n_elements`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsSettings {
    pub theta: f64,
    pub forcing: Forcing,
    pub temporal_dtaus: Vec<f64>,
    pub temporal_n_p1: usize,
    pub temporal_n_p2: usize,
    pub spatial_sizes: Vec<usize>,
    pub spatial_dtau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub contract: ContractConfig,
    pub market: MarketConfig,
    pub numerics: NumericsConfig,
    pub sweep: SweepConfig,
    pub mms: MmsSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            contract: ContractConfig {
                face_value: 100.0,
                coupon: 4.0,
                coupon_times: semiannual(5.0, 2),
                conversion_ratio: 1.0,
                maturity: 5.0,
                call: ProvisionConfig {
                    enabled: true,
                    price: 110.0,
                    window: "(3, 5]".into(),
                },
                put: ProvisionConfig {
                    enabled: true,
                    price: 105.0,
                    window: "(2, 3]".into(),
                },
            },
            market: MarketConfig {
                r: 0.05,
                r_c: 0.02,
                sigma: 0.2,
                s_int: 100.0,
            },
            numerics: NumericsConfig {
                x_min: -6.0,
                x_max: 2.0,
                n_elements: 400,
                order: Order::P2,
                n_t: 400,
                theta: 0.5,
                rho: 1e12,
                newton_tol: 1e-12,
                max_iter: 100,
            },
            sweep: SweepConfig {
                sizes: vec![100, 200, 400],
            },
            mms: MmsSettings {
                theta: 1.0,
                forcing: Forcing::Load,
                temporal_dtaus: vec![1.0, 0.5, 0.2, 0.1],
                temporal_n_p1: 3333,
                temporal_n_p2: 1000,
                spatial_sizes: vec![10, 20, 40, 80, 100],
                spatial_dtau: 1e-4,
            },
        }
    }
}

fn semiannual(maturity: f64, per_year: u32) -> Vec<f64> {
    let count = (maturity * f64::from(per_year)).round() as u32;
    (1..=count)
        .map(|i| f64::from(i) / f64::from(per_year))
        .collect()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProvision {
    enabled: Option<Spanned<bool>>,
    price: Option<Spanned<f64>>,
    window: Option<Spanned<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContract {
    face_value: Option<Spanned<f64>>,
    coupon: Option<Spanned<f64>>,
    coupon_times: Option<Spanned<Vec<f64>>>,
    coupons_per_year: Option<Spanned<u32>>,
    conversion_ratio: Option<Spanned<f64>>,
    maturity: Option<Spanned<f64>>,
    call: Option<RawProvision>,
    put: Option<RawProvision>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarket {
    r: Option<Spanned<f64>>,
    r_c: Option<Spanned<f64>>,
    sigma: Option<Spanned<f64>>,
    s_int: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    x_min: Option<Spanned<f64>>,
    x_max: Option<Spanned<f64>>,
    n_elements: Option<Spanned<usize>>,
    order: Option<Spanned<Order>>,
    n_t: Option<Spanned<usize>>,
    theta: Option<Spanned<f64>>,
    rho: Option<Spanned<f64>>,
    newton_tol: Option<Spanned<f64>>,
    max_iter: Option<Spanned<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    sizes: Option<Spanned<Vec<usize>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMms {
    theta: Option<Spanned<f64>>,
    forcing: Option<Spanned<Forcing>>,
    temporal_dtaus: Option<Spanned<Vec<f64>>>,
    temporal_n_p1: Option<Spanned<usize>>,
    temporal_n_p2: Option<Spanned<usize>>,
    spatial_sizes: Option<Spanned<Vec<usize>>>,
    spatial_dtau: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    contract: Option<RawContract>,
    market: Option<RawMarket>,
    numerics: Option<RawNumerics>,
    sweep: Option<RawSweep>,
    mms: Option<RawMms>,
}

/// Command-line values that replace configuration entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub order: Option<Order>,
    pub n_elements: Option<usize>,
    pub n_t: Option<usize>,
    pub theta: Option<f64>,
    pub rho: Option<f64>,
    pub sizes: Option<Vec<usize>>,
}

/// Where each field came from, for error messages.
#[derive(Debug, Default)]
struct Origins {
    text: String,
    fields: HashMap<&'static str, String>,
}

impl Origins {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())]
            .matches('\n')
            .count()
            + 1
    }

    fn record<T>(&mut self, key: &'static str, value: &Spanned<T>) {
        let line = self.line_of(value.span().start);
        self.fields.insert(key, format!("line {line}"));
    }

    fn section(&self, name: &str) -> String {
        let header = format!("[{name}]");
        self.text
            .lines()
            .position(|l| l.trim() == header)
            .map(|i| format!("line {}", i + 1))
            .unwrap_or_else(|| "defaults".into())
    }

    fn anchor(&self, key: &str) -> String {
        self.fields
            .get(key)
            .cloned()
            .unwrap_or_else(|| "defaults".into())
    }
}

macro_rules! take {
    ($origins:expr, $raw:expr, $key:literal, $dst:expr) => {
        if let Some(v) = $raw {
            $origins.record($key, &v);
            $dst = v.into_inner();
        }
    };
}

fn apply_provision(
    origins: &mut Origins,
    raw: Option<RawProvision>,
    dst: &mut ProvisionConfig,
    keys: [&'static str; 3],
) {
    let Some(raw) = raw else { return };
    if let Some(v) = raw.enabled {
        origins.record(keys[0], &v);
        dst.enabled = v.into_inner();
    }
    if let Some(v) = raw.price {
        origins.record(keys[1], &v);
        dst.price = v.into_inner();
    }
    if let Some(v) = raw.window {
        origins.record(keys[2], &v);
        dst.window = v.into_inner();
    }
}

/// Parses and validates with no command-line overrides.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    load(text, &Overrides::default())
}

/// Parses `text`, applies `overrides`, and validates the result, collecting every
/// violation.
pub fn load(text: &str, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text)
        .map_err(|e| CliError::Config(vec![e.to_string().trim().to_string()]))?;
    let mut origins = Origins {
        text: text.to_string(),
        ..Origins::default()
    };
    let mut cfg = RunConfig::default();

    if let Some(c) = raw.contract {
        let dst = &mut cfg.contract;
        take!(origins, c.face_value, "contract.face_value", dst.face_value);
        take!(origins, c.coupon, "contract.coupon", dst.coupon);
        take!(
            origins,
            c.conversion_ratio,
            "contract.conversion_ratio",
            dst.conversion_ratio
        );
        take!(origins, c.maturity, "contract.maturity", dst.maturity);
        let mut per_year = 2;
        take!(
            origins,
            c.coupons_per_year,
            "contract.coupons_per_year",
            per_year
        );
        if per_year > 0 {
            dst.coupon_times = semiannual(dst.maturity, per_year);
        } else {
            dst.coupon_times.clear();
        }
        take!(
            origins,
            c.coupon_times,
            "contract.coupon_times",
            dst.coupon_times
        );
        apply_provision(
            &mut origins,
            c.call,
            &mut dst.call,
            [
                "contract.call.enabled",
                "contract.call.price",
                "contract.call.window",
            ],
        );
        apply_provision(
            &mut origins,
            c.put,
            &mut dst.put,
            [
                "contract.put.enabled",
                "contract.put.price",
                "contract.put.window",
            ],
        );
    }
    if let Some(m) = raw.market {
        let dst = &mut cfg.market;
        take!(origins, m.r, "market.r", dst.r);
        take!(origins, m.r_c, "market.r_c", dst.r_c);
        take!(origins, m.sigma, "market.sigma", dst.sigma);
        take!(origins, m.s_int, "market.s_int", dst.s_int);
    }
    let mut n_t_given = false;
    if let Some(n) = raw.numerics {
        let dst = &mut cfg.numerics;
        n_t_given = n.n_t.is_some();
        take!(origins, n.x_min, "numerics.x_min", dst.x_min);
        take!(origins, n.x_max, "numerics.x_max", dst.x_max);
        take!(origins, n.n_elements, "numerics.n_elements", dst.n_elements);
        take!(origins, n.order, "numerics.order", dst.order);
        take!(origins, n.n_t, "numerics.n_t", dst.n_t);
        take!(origins, n.theta, "numerics.theta", dst.theta);
        take!(origins, n.rho, "numerics.rho", dst.rho);
        take!(origins, n.newton_tol, "numerics.newton_tol", dst.newton_tol);
        take!(origins, n.max_iter, "numerics.max_iter", dst.max_iter);
    }
    if let Some(s) = raw.sweep {
        take!(origins, s.sizes, "sweep.sizes", cfg.sweep.sizes);
    }
    if let Some(m) = raw.mms {
        let dst = &mut cfg.mms;
        take!(origins, m.theta, "mms.theta", dst.theta);
        take!(origins, m.forcing, "mms.forcing", dst.forcing);
        take!(
            origins,
            m.temporal_dtaus,
            "mms.temporal_dtaus",
            dst.temporal_dtaus
        );
        take!(
            origins,
            m.temporal_n_p1,
            "mms.temporal_n_p1",
            dst.temporal_n_p1
        );
        take!(
            origins,
            m.temporal_n_p2,
            "mms.temporal_n_p2",
            dst.temporal_n_p2
        );
        take!(
            origins,
            m.spatial_sizes,
            "mms.spatial_sizes",
            dst.spatial_sizes
        );
        take!(
            origins,
            m.spatial_dtau,
            "mms.spatial_dtau",
            dst.spatial_dtau
        );
    }

    let mut flag = |key: &'static str, name: &str| {
        origins.fields.insert(key, format!("flag --{name}"));
    };
    if let Some(o) = overrides.order {
        cfg.numerics.order = o;
        flag("numerics.order", "order");
    }
    if let Some(n) = overrides.n_elements {
        cfg.numerics.n_elements = n;
        flag("numerics.n_elements", "n-elements");
        // keep the default pairing n_t = n_E unless n_t was set explicitly
        if !n_t_given && overrides.n_t.is_none() {
            cfg.numerics.n_t = n;
        }
    }
    if let Some(n) = overrides.n_t {
        cfg.numerics.n_t = n;
        flag("numerics.n_t", "n-t");
    }
    if let Some(t) = overrides.theta {
        cfg.numerics.theta = t;
        flag("numerics.theta", "theta");
    }
    if let Some(r) = overrides.rho {
        cfg.numerics.rho = r;
        flag("numerics.rho", "rho");
    }
    if let Some(s) = &overrides.sizes {
        cfg.sweep.sizes = s.clone();
        flag("sweep.sizes", "sizes");
    }

    let problems = validate(&cfg, &origins);
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Config(problems))
    }
}

fn validate(cfg: &RunConfig, origins: &Origins) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |ok: bool, key: &str, msg: String| {
        if !ok {
            out.push(format!("{}: {key} {msg}", origins.anchor(key)));
        }
    };
    let positive = |v: f64| v.is_finite() && v > 0.0;
    let nonneg = |v: f64| v.is_finite() && v >= 0.0;

    let c = &cfg.contract;
    check(
        positive(c.face_value),
        "contract.face_value",
        format!("must be > 0 (got {})", c.face_value),
    );
    check(
        nonneg(c.coupon),
        "contract.coupon",
        format!("must be >= 0 (got {})", c.coupon),
    );
    check(
        nonneg(c.conversion_ratio),
        "contract.conversion_ratio",
        format!("must be >= 0 (got {})", c.conversion_ratio),
    );
    check(
        positive(c.maturity),
        "contract.maturity",
        format!("must be > 0 (got {})", c.maturity),
    );
    for (p, name) in [(&c.call, "call"), (&c.put, "put")] {
        if !p.enabled {
            continue;
        }
        let price_key = if name == "call" {
            "contract.call.price"
        } else {
            "contract.put.price"
        };
        let window_key = if name == "call" {
            "contract.call.window"
        } else {
            "contract.put.window"
        };
        check(
            positive(p.price),
            price_key,
            format!("must be > 0 (got {})", p.price),
        );
        if let Err(e) = Window::<f64>::from_str(&p.window) {
            check(false, window_key, e.to_string());
        }
    }

    let m = &cfg.market;
    check(
        nonneg(m.r),
        "market.r",
        format!("must be >= 0 (got {})", m.r),
    );
    check(
        nonneg(m.r_c),
        "market.r_c",
        format!("must be >= 0 (got {})", m.r_c),
    );
    check(
        positive(m.sigma),
        "market.sigma",
        format!("must be > 0 (got {})", m.sigma),
    );
    check(
        positive(m.s_int),
        "market.s_int",
        format!("must be > 0 (got {})", m.s_int),
    );

    let n = &cfg.numerics;
    check(
        n.x_min.is_finite(),
        "numerics.x_min",
        format!("must be finite (got {})", n.x_min),
    );
    check(
        n.x_max.is_finite() && n.x_max > n.x_min,
        "numerics.x_max",
        format!("must be finite and > x_min (got {})", n.x_max),
    );
    check(
        n.n_elements >= 2,
        "numerics.n_elements",
        format!("must be >= 2 (got {})", n.n_elements),
    );
    check(
        n.n_t >= 1,
        "numerics.n_t",
        format!("must be >= 1 (got {})", n.n_t),
    );
    check(
        (0.0..=1.0).contains(&n.theta),
        "numerics.theta",
        format!("must lie in [0, 1] (got {})", n.theta),
    );
    check(
        positive(n.rho),
        "numerics.rho",
        format!("must be > 0 (got {})", n.rho),
    );
    check(
        positive(n.newton_tol),
        "numerics.newton_tol",
        format!("must be > 0 (got {})", n.newton_tol),
    );
    check(
        n.max_iter >= 1,
        "numerics.max_iter",
        format!("must be >= 1 (got {})", n.max_iter),
    );

    check(
        !cfg.sweep.sizes.is_empty() && cfg.sweep.sizes.iter().all(|&s| s >= 2),
        "sweep.sizes",
        format!(
            "must be a non-empty list of sizes >= 2 (got {:?})",
            cfg.sweep.sizes
        ),
    );

    let mm = &cfg.mms;
    check(
        (0.0..=1.0).contains(&mm.theta),
        "mms.theta",
        format!("must lie in [0, 1] (got {})", mm.theta),
    );
    check(
        mm.temporal_dtaus.len() >= 2 && mm.temporal_dtaus.iter().all(|&d| divides_unit(d)),
        "mms.temporal_dtaus",
        format!(
            "needs at least two steps that divide [0, 1] (got {:?})",
            mm.temporal_dtaus
        ),
    );
    check(
        mm.temporal_n_p1 >= 2,
        "mms.temporal_n_p1",
        format!("must be >= 2 (got {})", mm.temporal_n_p1),
    );
    check(
        mm.temporal_n_p2 >= 2,
        "mms.temporal_n_p2",
        format!("must be >= 2 (got {})", mm.temporal_n_p2),
    );
    check(
        mm.spatial_sizes.len() >= 2 && mm.spatial_sizes.iter().all(|&s| s >= 2),
        "mms.spatial_sizes",
        format!("needs at least two sizes >= 2 (got {:?})", mm.spatial_sizes),
    );
    check(
        divides_unit(mm.spatial_dtau),
        "mms.spatial_dtau",
        format!("must divide [0, 1] (got {})", mm.spatial_dtau),
    );

    // Cross-field rules come from the engine's own validators once the fields are sane.
    if out.is_empty() {
        if let Err(e) = cfg.contract() {
            out.push(format!("{}: {e}", origins.section("contract")));
        } else if let Err(e) =
            cbfem::stepper::check_coupon_alignment(&cfg.contract().unwrap(), n.n_t)
        {
            out.push(format!(
                "{}: numerics.n_t {e}",
                origins.anchor("numerics.n_t")
            ));
        }
    }
    out
}

fn divides_unit(d: f64) -> bool {
    d > 0.0 && d <= 1.0 && ((1.0 / d).round() * d - 1.0).abs() <= 1e-9
}

impl RunConfig {
    pub fn contract(&self) -> cbfem::Result<BondContract<f64>> {
        let c = &self.contract;
        let provision = |p: &ProvisionConfig| -> cbfem::Result<Option<Provision<f64>>> {
            if !p.enabled {
                return Ok(None);
            }
            Ok(Some(Provision {
                clean_price: p.price,
                window: p.window.parse()?,
            }))
        };
        BondContract::new(
            c.face_value,
            c.coupon,
            c.coupon_times.clone(),
            c.conversion_ratio,
            provision(&c.call)?,
            provision(&c.put)?,
            c.maturity,
        )
    }

    pub fn market(&self) -> cbfem::Result<MarketParams<f64>> {
        let m = &self.market;
        MarketParams::new(m.r, m.r_c, m.sigma, m.s_int)
    }

    pub fn newton(&self) -> NewtonConfig<f64> {
        NewtonConfig {
            tol: self.numerics.newton_tol,
            max_iter: self.numerics.max_iter,
            rho: self.numerics.rho,
        }
    }

    pub fn element_order(&self) -> ElementOrder {
        self.numerics.order.into()
    }

    /// Manufactured-solution case built from the configured market and face value.
    pub fn mms_case(&self) -> cbfem::Result<MmsCase<f64>> {
        Ok(MmsCase {
            market: self.market()?,
            face_value: self.contract.face_value,
        })
    }

    pub fn mms_config(&self) -> MmsConfig<f64> {
        MmsConfig {
            theta: self.mms.theta,
            forcing: match self.mms.forcing {
                Forcing::Load => ForcingMode::LoadVector,
                Forcing::Nodal => ForcingMode::Nodal,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(CliError::Config(v)) => v,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn defaults_match_the_benchmark() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.contract().unwrap(), BondContract::benchmark());
        assert_eq!(cfg.market().unwrap(), MarketParams::benchmark());
        assert_eq!(cfg.newton(), NewtonConfig::default());
        assert_eq!((cfg.numerics.x_min, cfg.numerics.x_max), (-6.0, 2.0));
        assert_eq!(cfg.numerics.theta, 0.5);
    }

    #[test]
    fn explicit_benchmark_file() {
        let text = "[contract]\nface_value = 100.0\ncoupon = 4.0\n\n[market]\nsigma = 0.2\nr = 0.05\nr_c = 0.02\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.contract.face_value, 100.0);
        assert_eq!(cfg.contract.coupon, 4.0);
        assert_eq!(cfg.market.sigma, 0.2);
    }

    #[test]
    fn negative_sigma_names_field_and_line() {
        let v = violations("[market]\nr = 0.05\nsigma = -0.1\n");
        assert_eq!(v.len(), 1);
        assert!(v[0].starts_with("line 3: market.sigma"), "{}", v[0]);
    }

    #[test]
    fn all_violations_are_reported() {
        let v = violations("[market]\nsigma = -0.1\ns_int = 0.0\n[numerics]\ntheta = 2.0\n");
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(v[2].starts_with("line 5: numerics.theta"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let v = violations("[market]\nvol = 0.2\n");
        assert!(
            v[0].contains("unknown field") && v[0].contains("line 2"),
            "{}",
            v[0]
        );
    }

    #[test]
    fn misaligned_time_grid_is_reported() {
        let v = violations("[numerics]\nn_t = 33\n");
        assert!(v[0].starts_with("line 2: numerics.n_t"), "{}", v[0]);
    }

    #[test]
    fn bad_window_is_reported() {
        let v = violations("[contract.call]\nwindow = \"3..5\"\n");
        assert!(v[0].starts_with("line 2: contract.call.window"), "{}", v[0]);
    }

    #[test]
    fn overrides_take_effect_and_pair_n_t() {
        let o = Overrides {
            n_elements: Some(200),
            theta: Some(1.0),
            order: Some(Order::P1),
            ..Overrides::default()
        };
        let cfg = load("", &o).unwrap();
        assert_eq!(cfg.numerics.n_elements, 200);
        assert_eq!(cfg.numerics.n_t, 200);
        assert_eq!(cfg.numerics.theta, 1.0);
        assert_eq!(cfg.numerics.order, Order::P1);
        let bad = Overrides {
            rho: Some(-1.0),
            ..Overrides::default()
        };
        match load("", &bad) {
            Err(CliError::Config(v)) => assert!(v[0].starts_with("flag --rho: numerics.rho")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn disabled_provisions_are_dropped() {
        let cfg = parse_config("[contract.call]\nenabled = false\n").unwrap();
        assert!(cfg.contract().unwrap().call.is_none());
    }
}
