//! Register the Table-1 module set, search it, rate a module and export the
//! canonical repository archive.

use coursegate::fixtures;
use coursegate::registry::{Registry, ScaleLevel, SearchQuery};

fn main() {
    let registry = Registry::new();
    for meta in fixtures::table1_fixture_set() {
        let id = registry.register_module(meta).expect("fixtures are valid");
        println!("registered {id}");
    }

    let query = SearchQuery {
        keywords: vec!["MD".into()],
        scale: Some(ScaleLevel::Mini),
        ..SearchQuery::default()
    };
    for hit in registry.search_modules(&query) {
        println!("hit: {} ({}, complexity {})", hit.title, hit.scale, hit.complexity);
    }

    for stars in [5, 4, 4] {
        registry.rate_module(fixtures::TABLE1_ID, stars).unwrap();
    }
    let rating = registry.get(fixtures::TABLE1_ID).unwrap().rating;
    println!("rating: {} votes, mean {:.2}", rating.count, rating.mean().unwrap());

    let err = registry.rate_module(fixtures::TABLE1_ID, 9).unwrap_err();
    println!("rating 9 stars: {}", err.code());

    let archive = registry.export_repository();
    println!("archive: {} bytes", archive.len());
    let copy = Registry::new();
    copy.import_repository(&archive).unwrap();
    assert_eq!(copy.export_repository(), archive);
    println!("re-export is byte-identical");
}
