//! Start the HTTP service on a free port inside another program, call it
//! over plain TCP, then shut it down and show that state survived.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};

use coursegate::fixtures;
use coursegate_service::{serve, ServeConfig};

fn request(addr: SocketAddr, method: &str, path: &str, body: &str) -> String {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\n\
         Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    let (head, body) = reply.split_once("\r\n\r\n").unwrap_or((&reply, ""));
    format!("{} -> {body}", head.lines().next().unwrap_or_default())
}

#[tokio::main]
async fn main() {
    let data = tempfile::tempdir().unwrap();
    let server = serve(ServeConfig::new(0, data.path())).await.unwrap();
    let addr = server.local_addr();
    println!("listening on {addr}");

    let replies = tokio::task::spawn_blocking(move || {
        vec![
            request(addr, "POST", "/v1/modules", fixtures::TABLE1_MODULE_JSON),
            request(addr, "POST", "/v1/modules", fixtures::TABLE1_MODULE_JSON),
            request(addr, "GET", "/v1/modules/search?keyword=Al-Cu", ""),
            request(addr, "POST", "/v1/runs", r#"{"workflow_id":"nope"}"#),
        ]
    })
    .await
    .unwrap();
    for r in replies {
        println!("{}", r.chars().take(160).collect::<String>());
    }
    server.shutdown().await.unwrap();

    let server = serve(ServeConfig::new(0, data.path())).await.unwrap();
    let ids: Vec<String> = server.store().list_modules().into_iter().map(|m| m.id.to_string()).collect();
    println!("after restart: {ids:?}");
    server.shutdown().await.unwrap();
}
