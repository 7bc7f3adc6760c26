#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use chrono::{NaiveDate, NaiveDateTime};
use plainsql::translator::{CandidateSql, FixtureEntry, TranslateError};
use plainsql::{Engine, EngineConfig, FixtureTranslator, NormalizedQuery, OnboardedDatabase, Translator};
use rusqlite::Connection;

pub const MARY_Q: &str = "What are the email addresses of the customer whose first name is MARY?";
pub const MARY_SQL: &str = "SELECT customer.email FROM customer WHERE customer.first_name = 'Terminal'";
pub const MARY_RESOLVED: &str = "SELECT customer.email FROM customer WHERE customer.first_name = 'MARY'";

pub const JHONNY_Q: &str = "Name all movies starring Jhonny Cage";
pub const JHONNY_SQL: &str = "SELECT film.title FROM actor JOIN film JOIN film_actor ON actor.actor_id = film_actor.actor_id AND film_actor.film_id = film.film_id AND actor.actor_id = film_actor.actor_id WHERE actor.first_name = 'Terminal'";
pub const JHONNY_RESOLVED: &str = "SELECT film.title FROM actor JOIN film JOIN film_actor ON actor.actor_id = film_actor.actor_id AND film_actor.film_id = film.film_id AND actor.actor_id = film_actor.actor_id WHERE actor.first_name = 'JOHNNY'";

pub const CLICKS_Q: &str = "Which users clicked on the ad at least two times?";
pub const CLICKS_SQL: &str = "SELECT users.name FROM users WHERE users.ad_clicks >= 'Terminal'";
pub const CLICKS_RESOLVED: &str = "SELECT users.name FROM users WHERE users.ad_clicks >= 2";

pub const LONGITUDE_Q: &str = "Which places had a positive longitude value?";
pub const LONGITUDE_SQL: &str = "SELECT DISTINCT quakes.place FROM quakes WHERE quakes.longitude = 'Terminal'";

pub const COLORADO_Q: &str = "How many times have earthquakes occur in Colorado?";
pub const COLORADO_SQL: &str = "SELECT COUNT(*) FROM quakes WHERE quakes.place = 'Terminal'";

pub const BRAND_Q: &str = "Which brand car has the most customers?";
pub const BRAND_SQL: &str = "SELECT brands.brand_name FROM dealer_brand JOIN brands ON dealer_brand.brand_id = brands.brand_id GROUP BY brands.brand_name ORDER BY COUNT(*) DESC LIMIT 1";

pub const DEPTH_Q: &str = "Average depth per place";
pub const DEPTH_SQL: &str = "SELECT quakes.place, AVG(quakes.depth) FROM quakes GROUP BY quakes.place";

pub fn reference_time() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2022, 3, 15).unwrap().and_hms_opt(12, 0, 0).unwrap()
}

/// A small SQLite source covering every example question.
pub fn fixture_source(dir: &Path) -> PathBuf {
    let path = dir.join("fixture.sqlite");
    let conn = Connection::open(&path).unwrap();
    conn.execute_batch(
        "CREATE TABLE customer (customer_id INTEGER, first_name TEXT, last_name TEXT, email TEXT);
         INSERT INTO customer VALUES
           (1, 'MARY', 'SMITH', 'mary.smith@sakilacustomer.org'),
           (2, 'PATRICIA', 'JOHNSON', 'patricia.johnson@sakilacustomer.org'),
           (3, 'LINDA', 'WILLIAMS', 'linda.williams@sakilacustomer.org');
         CREATE TABLE actor (actor_id INTEGER, first_name TEXT, last_name TEXT);
         INSERT INTO actor VALUES (1, 'PENELOPE', 'GUINESS'), (2, 'NICK', 'WAHLBERG'), (3, 'JOHNNY', 'CAGE'), (4, 'ED', 'CHASE');
         CREATE TABLE film (film_id INTEGER, title TEXT);
         INSERT INTO film VALUES (1, 'ACADEMY DINOSAUR'), (2, 'ANACONDA CONFESSIONS'), (3, 'BANGER PINOCCHIO');
         CREATE TABLE film_actor (actor_id INTEGER, film_id INTEGER);
         INSERT INTO film_actor VALUES (1, 1), (3, 2), (3, 3), (4, 1);
         CREATE TABLE users (name TEXT, ad_clicks INTEGER);
         INSERT INTO users VALUES ('ann', 0), ('bob', 1), ('cid', 2), ('dee', 5);
         CREATE TABLE quakes (place TEXT, depth REAL, latitude REAL, longitude REAL);
         INSERT INTO quakes VALUES
           ('Colorado', 5.0, 38.5, -105.2), ('Colorado', 7.5, 39.1, -104.8), ('Alaska', 35.0, 61.2, -149.9),
           ('Fiji', 550.0, -17.7, 178.1), ('Chile', 120.0, -33.4, -70.6), ('Alaska', 12.0, 60.1, -151.0);
         CREATE TABLE brands (brand_id INTEGER, brand_name TEXT);
         INSERT INTO brands VALUES (1, 'Toyota'), (2, 'Ford');
         CREATE TABLE dealer_brand (dealer_id INTEGER, brand_id INTEGER);
         INSERT INTO dealer_brand VALUES (1, 1), (2, 1), (3, 2);",
    )
    .unwrap();
    path
}

pub fn fixture_entries() -> Vec<FixtureEntry> {
    [
        (MARY_Q, MARY_SQL),
        (JHONNY_Q, JHONNY_SQL),
        (CLICKS_Q, CLICKS_SQL),
        (LONGITUDE_Q, LONGITUDE_SQL),
        (COLORADO_Q, COLORADO_SQL),
        (BRAND_Q, BRAND_SQL),
        (DEPTH_Q, DEPTH_SQL),
        ("show all customers", "SELECT * FROM customer OVER (PARTITION BY customer.email)"),
    ]
    .into_iter()
    .map(|(pattern, sql)| FixtureEntry { pattern: pattern.into(), sql: sql.into() })
    .collect()
}

/// Fixture translator that counts backend calls.
pub struct CountingTranslator {
    pub inner: FixtureTranslator,
    pub calls: AtomicUsize,
}

impl CountingTranslator {
    pub fn new(entries: Vec<FixtureEntry>) -> Self {
        CountingTranslator { inner: FixtureTranslator::new(entries), calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Translator for CountingTranslator {
    fn backend_id(&self) -> &str {
        "counting-fixture"
    }

    fn translate(&self, q: &NormalizedQuery, s: &OnboardedDatabase) -> Result<CandidateSql, TranslateError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.translate(q, s)
    }
}

/// Engine over a temp data dir with the fixture database onboarded.
pub fn fixture_engine(dir: &Path) -> (Engine, Arc<CountingTranslator>, String) {
    let translator = Arc::new(CountingTranslator::new(fixture_entries()));
    let engine = Engine::open(EngineConfig::new(dir.join("data")), translator.clone()).unwrap();
    let source = plainsql::Source::detect(fixture_source(dir)).unwrap();
    let db = engine.onboard(&source, &Default::default()).unwrap();
    (engine, translator, db.id)
}
