//! Runs the JSON API with default settings plus `PRIVCHECK_*` overrides.
//!
//!     PRIVCHECK_LISTEN=127.0.0.1:8080 cargo run --example serve
//!     curl -X POST localhost:8080/api/v1/sessions \
//!          -H 'content-type: application/json' -d @snapshot_request.json

use privcheck::config::Config;

#[tokio::main]
async fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let config = Config::load(None).expect("valid PRIVCHECK_* settings");
    if let Err(e) = privcheck::http::serve(config).await {
        eprintln!("server stopped: {e}");
        std::process::exit(1);
    }
}
