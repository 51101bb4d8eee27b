//! Regenerates `fixtures/superstore.csv`, a small synthetic Asia Pacific
//! superstore extract. North Asia furniture sales collapse in 2012.
//!
//!     cargo run -p walkd-core --example gen_fixture > crates/core/fixtures/superstore.csv

use chrono::{Datelike, Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROWS: usize = 1000;
const SEED: u64 = 2012;

struct Place {
    region: &'static str,
    country: &'static str,
    state: &'static str,
    city: &'static str,
}

const PLACES: &[Place] = &[
    Place { region: "North Asia", country: "China", state: "Beijing", city: "Beijing" },
    Place { region: "North Asia", country: "China", state: "Shandong", city: "Jining" },
    Place { region: "North Asia", country: "South Korea", state: "Seoul", city: "Seoul" },
    Place { region: "Southeast Asia", country: "Indonesia", state: "Jakarta", city: "Jakarta" },
    Place { region: "Southeast Asia", country: "Indonesia", state: "East Java", city: "Surabaya" },
    Place { region: "Southeast Asia", country: "Philippines", state: "Metro Manila", city: "Manila" },
    Place { region: "Southeast Asia", country: "Vietnam", state: "Hanoi", city: "Hanoi" },
    Place { region: "Oceania", country: "Australia", state: "New South Wales", city: "Sydney" },
    Place { region: "Oceania", country: "Australia", state: "Victoria", city: "Melbourne" },
    Place { region: "Oceania", country: "New Zealand", state: "Auckland", city: "Auckland" },
    Place { region: "Central Asia", country: "India", state: "Maharashtra", city: "Mumbai" },
    Place { region: "Central Asia", country: "India", state: "Delhi", city: "Delhi" },
    Place { region: "Central Asia", country: "Pakistan", state: "Sindh", city: "Karachi" },
];

const CATALOG: &[(&str, &str, &[&str], f64)] = &[
    ("Furniture", "Chairs", &["Harbour Task Chair", "Novimex Executive Chair"], 420.0),
    ("Furniture", "Tables", &["Bevis Round Table", "Barricks Conference Table"], 760.0),
    ("Furniture", "Bookcases", &["Sauder Library Bookcase", "Bush Westfield Bookcase"], 510.0),
    ("Office Supplies", "Binders", &["Avery Binder", "Cardinal Binder"], 40.0),
    ("Office Supplies", "Paper", &["Xerox Copy Paper", "Eaton Note Cards"], 28.0),
    ("Office Supplies", "Storage", &["Fellowes File Cart", "Smead Lockers"], 190.0),
    ("Technology", "Phones", &["Apple Smart Phone", "Nokia Smart Phone"], 530.0),
    ("Technology", "Copiers", &["Hewlett Wireless Fax", "Canon Copy Machine"], 880.0),
];

const CUSTOMERS: &[&str] = &[
    "Aaron Bergman", "Ben Ferrer", "Chen Wei", "Dana Teague", "Eleni McCrary", "Fumiko Sato",
    "Grace Kelly", "Hiroshi Tanaka", "Ian Hunter", "Jin Park", "Kumar Patel", "Lena Cartwright",
    "Min-jun Lee", "Nora Price", "Omar Siddiqui", "Priya Nair",
];
const SEGMENTS: &[&str] = &["Consumer", "Corporate", "Home Office"];
const SHIP_MODES: &[&str] = &["Standard Class", "Second Class", "First Class", "Same Day"];
const PRIORITIES: &[&str] = &["Low", "Medium", "High", "Critical"];
const DISCOUNTS: &[f64] = &[0.0, 0.0, 0.0, 0.1, 0.2, 0.25, 0.4];

/// Rounds to a multiple of 0.25 so that sums are exact in binary floating
/// point whatever the summation order.
fn quarter(v: f64) -> f64 {
    (v * 4.0).round() / 4.0
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = csv::Writer::from_writer(std::io::stdout().lock());
    out.write_record([
        "Row ID", "Order ID", "Order Date", "Ship Date", "Ship Mode", "Customer Name", "Segment",
        "City", "State", "Country", "Market", "Region", "Category", "Sub-Category",
        "Product Name", "Sales", "Quantity", "Discount", "Profit", "Order Priority", "Year",
    ])?;

    let start = NaiveDate::from_ymd_opt(2011, 1, 1).expect("valid date");
    for row in 0..ROWS {
        let place = PLACES.choose(&mut rng).expect("places");
        let (category, sub, products, base) = *CATALOG.choose(&mut rng).expect("catalog");
        let order_date = start + Duration::days(rng.gen_range(0..1461));
        let ship_date = order_date + Duration::days(rng.gen_range(0..7));
        let year = order_date.year();
        let quantity: u32 = rng.gen_range(1..=9);
        let discount = *DISCOUNTS.choose(&mut rng).expect("discounts");

        let mut sales = base * f64::from(quantity) * rng.gen_range(0.6..1.4) * (1.0 - discount);
        if place.region == "North Asia" && category == "Furniture" && year == 2012 {
            sales *= 0.05;
        }
        let sales = quarter(sales.max(0.25));
        let profit = quarter(sales * rng.gen_range(-0.3..0.35));

        out.write_record([
            (row + 1).to_string(),
            format!("AP-{year}-{}", 100_000 + row * 7 % 90_000),
            order_date.format("%Y-%m-%d").to_string(),
            ship_date.format("%Y-%m-%d").to_string(),
            SHIP_MODES.choose(&mut rng).expect("modes").to_string(),
            CUSTOMERS.choose(&mut rng).expect("customers").to_string(),
            SEGMENTS.choose(&mut rng).expect("segments").to_string(),
            place.city.to_string(),
            place.state.to_string(),
            place.country.to_string(),
            "Asia Pacific".to_string(),
            place.region.to_string(),
            category.to_string(),
            sub.to_string(),
            products.choose(&mut rng).expect("products").to_string(),
            sales.to_string(),
            quantity.to_string(),
            discount.to_string(),
            profit.to_string(),
            PRIORITIES.choose(&mut rng).expect("priorities").to_string(),
            year.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
