mod common;

use common::*;
use plainsql::resolver::ResolutionMethod;
use plainsql::{Engine, EngineConfig, ServiceError, Value};

#[test]
fn mary_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, _, id) = fixture_engine(dir.path());
    let r = engine.query(&id, MARY_Q, Some(reference_time())).unwrap();
    assert_eq!(r.sql, MARY_RESOLVED);
    assert_eq!(r.result.rows, vec![vec![Value::Text("mary.smith@sakilacustomer.org".into())]]);
    assert_eq!(
        r.explanation,
        "Column(s): customer.email Table(s): customer, Filtered on: customer.first_name = 'MARY'"
    );
    assert!(r.warnings.is_empty());
    assert_eq!(r.replacements[0].method, ResolutionMethod::Exact);
    assert!(!r.from_cache);
    // The resolved statement is always inside the grammar.
    plainsql::parse(&r.sql, &engine.database(&id).unwrap()).unwrap();
}

#[test]
fn repeat_question_is_served_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, backend, id) = fixture_engine(dir.path());
    assert!(!engine.query(&id, MARY_Q, Some(reference_time())).unwrap().from_cache);
    let again = engine.query(&id, MARY_Q, Some(reference_time())).unwrap();
    assert!(again.from_cache);
    assert_eq!(again.sql, MARY_RESOLVED);
    assert_eq!(backend.calls(), 1);
}

#[test]
fn cache_and_history_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, _, id) = fixture_engine(dir.path());
    engine.query(&id, MARY_Q, Some(reference_time())).unwrap();
    drop(engine);

    let backend = std::sync::Arc::new(CountingTranslator::new(fixture_entries()));
    let engine = Engine::open(EngineConfig::new(dir.path().join("data")), backend.clone()).unwrap();
    let r = engine.query(&id, MARY_Q, Some(reference_time())).unwrap();
    assert!(r.from_cache);
    assert_eq!(backend.calls(), 0);
    assert_eq!(engine.history(&id, 1).unwrap().len(), 2);
}

#[test]
fn unknown_database() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, _, _) = fixture_engine(dir.path());
    let err = engine.query("nope", MARY_Q, None).unwrap_err();
    assert!(matches!(err, ServiceError::UnknownDatabase(_)));
    assert_eq!(err.kind(), "unknown_database");
    assert!(matches!(engine.history("nope", 1), Err(ServiceError::UnknownDatabase(_))));
}

#[test]
fn history_is_newest_first() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, _, id) = fixture_engine(dir.path());
    assert!(engine.history(&id, 1).unwrap().is_empty());
    engine.query(&id, MARY_Q, Some(reference_time())).unwrap();
    engine.query(&id, CLICKS_Q, Some(reference_time())).unwrap();
    let h = engine.history(&id, 1).unwrap();
    assert_eq!(h.len(), 2);
    assert_eq!(h[0].raw_query, CLICKS_Q);
    assert_eq!(h[0].resolved_sql, CLICKS_RESOLVED);
    assert_eq!(h[1].raw_query, MARY_Q);
    assert!(h[0].timestamp >= h[1].timestamp);
    assert!(engine.history(&id, 9).unwrap().is_empty());
}

#[test]
fn unresolved_terminal_still_runs_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, _, id) = fixture_engine(dir.path());
    let r = engine.query(&id, LONGITUDE_Q, Some(reference_time())).unwrap();
    assert_eq!(r.sql, LONGITUDE_SQL);
    assert_eq!(r.warnings.len(), 1);
    assert!(r.warnings[0].contains("Terminal") && r.warnings[0].contains("check the query again"));
    assert_eq!(r.result.row_count, 0);
    // Failed resolutions are still recorded.
    assert_eq!(engine.history(&id, 1).unwrap()[0].warnings, r.warnings);
}

#[test]
fn textual_value_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, _, id) = fixture_engine(dir.path());
    let r = engine.query(&id, COLORADO_Q, Some(reference_time())).unwrap();
    assert_eq!(r.sql, "SELECT COUNT(*) FROM quakes WHERE quakes.place = 'Colorado'");
    assert_eq!(r.result.rows, vec![vec![Value::Integer(2)]]);
}

#[test]
fn no_translation_asks_to_check_the_query() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, backend, id) = fixture_engine(dir.path());
    let err = engine.query(&id, "what is the meaning of life", None).unwrap_err();
    assert_eq!(err.kind(), "no_translation");
    assert!(err.to_string().contains("check the query again"));
    // Failures are not cached.
    engine.query(&id, "what is the meaning of life", None).unwrap_err();
    assert_eq!(backend.calls(), 2);
    assert!(engine.history(&id, 1).unwrap().is_empty());
}

#[test]
fn unsupported_syntax_names_the_construct() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, _, id) = fixture_engine(dir.path());
    match engine.query(&id, "show all customers", None).unwrap_err() {
        ServiceError::UnsupportedSyntax { construct } => assert_eq!(construct, "window function"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn grouped_result_gets_charts_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (engine, _, id) = fixture_engine(dir.path());
    let r = engine.query(&id, DEPTH_Q, Some(reference_time())).unwrap();
    assert_eq!(r.result.row_count, 4);
    assert!(!r.visualizations.is_empty() && r.visualizations.len() <= 3);
    assert_eq!(r.visualizations[0].x, "place");
    for pair in r.visualizations.windows(2) {
        // Diversified order is not score order, but the first pick is the best.
        assert!(r.visualizations[0].score >= pair[1].score);
    }
    assert_eq!(engine.result_visualizations(&r.result_id).unwrap(), r.visualizations);
    let csv = String::from_utf8(engine.result_csv(&r.result_id).unwrap()).unwrap();
    assert!(csv.starts_with("place,AVG(quakes.depth)\r\n"), "{csv}");
    assert!(matches!(engine.result_csv("missing"), Err(ServiceError::UnknownResult(_))));
}

#[test]
fn results_expire() {
    let dir = tempfile::tempdir().unwrap();
    let backend = std::sync::Arc::new(CountingTranslator::new(fixture_entries()));
    let mut config = EngineConfig::new(dir.path().join("data"));
    config.result_ttl = std::time::Duration::ZERO;
    let engine = Engine::open(config, backend).unwrap();
    let db = engine.onboard(&plainsql::Source::detect(fixture_source(dir.path())).unwrap(), &Default::default()).unwrap();
    let r = engine.query(&db.id, MARY_Q, None).unwrap();
    assert!(matches!(engine.result(&r.result_id), Err(ServiceError::UnknownResult(_))));
}

#[test]
fn datetime_question_over_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("Sales Data.csv");
    std::fs::write(&csv, "Order Date,Region,Amount\n04/07/2021,north,10\n05/07/2021,south,20\n04/07/2021,south,5\n").unwrap();
    let backend = std::sync::Arc::new(CountingTranslator::new(vec![
        plainsql::translator::FixtureEntry {
            pattern: "total amount on 20210704".into(),
            sql: "SELECT SUM(sales_data.amount) FROM sales_data WHERE sales_data.order_date = 'Terminal'".into(),
        },
        plainsql::translator::FixtureEntry {
            pattern: "amount by region in Month: July, Year: 2021".into(),
            sql: "SELECT sales_data.region, SUM(sales_data.amount) FROM sales_data WHERE sales_data.order_date_month_name_long = 'Terminal' AND sales_data.order_date_year = 'Terminal' GROUP BY sales_data.region".into(),
        },
    ]));
    let engine = Engine::open(EngineConfig::new(dir.path().join("data")), backend).unwrap();
    let config: plainsql::OnboardingConfig =
        serde_json::from_str(r#"{"datetime_columns": {"Order Date": "dd/mm/yyyy"}}"#).unwrap();
    let db = engine.onboard(&plainsql::Source::detect(&csv).unwrap(), &config).unwrap();

    let r = engine.query(&db.id, "total amount on 4th July 2021", Some(reference_time())).unwrap();
    assert_eq!(r.normalized_query, "total amount on 20210704");
    assert_eq!(r.sql, "SELECT SUM(sales_data.amount) FROM sales_data WHERE sales_data.order_date = '20210704'");
    assert_eq!(r.result.rows, vec![vec![Value::Integer(15)]]);

    let r = engine.query(&db.id, "amount by region in July 2021", Some(reference_time())).unwrap();
    assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    assert!(r.sql.contains("order_date_month_name_long = 'July'") && r.sql.contains("order_date_year = 2021"), "{}", r.sql);
    assert_eq!(r.result.row_count, 2);
}
