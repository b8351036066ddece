//! Newline-delimited JSON request/response service over TCP or a pipe.
//! Each connection owns one session.

mod protocol;

use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

pub use protocol::{
    default_tags, AnnotationRecord, AnnotationStore, Connection, Difficulty, ErrorCode, RpcError, RpcRequest,
    RpcResponse, DEFAULT_SEED, TAGS_DOCUMENT,
};

/// Shared by every connection of one server.
#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub store: Arc<AnnotationStore>,
    pub tags: Arc<Vec<String>>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            store: Arc::new(AnnotationStore::in_memory()),
            tags: Arc::new(default_tags().to_vec()),
        }
    }
}

/// Reads requests until EOF, answering each line in order. The session is
/// torn down when the input ends, even on an I/O error.
pub fn serve_stream<R: BufRead, W: Write>(reader: R, mut writer: W, config: &ServerConfig) -> io::Result<()> {
    let mut conn = Connection::new(config.store.clone(), config.tags.clone());
    let outcome = (|| {
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let reply = conn.handle_line(&line);
            writer.write_all(reply.as_bytes())?;
            writer.write_all(b"\n")?;
            writer.flush()?;
        }
        Ok(())
    })();
    conn.close();
    outcome
}

fn serve_tcp_connection(stream: TcpStream, config: ServerConfig) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    serve_stream(reader, stream, &config)
}

/// Accepts connections forever, one thread each.
pub fn serve_tcp(listener: TcpListener, config: ServerConfig) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let config = config.clone();
        thread::spawn(move || {
            let _ = serve_tcp_connection(stream, config);
        });
    }
    Ok(())
}

pub fn serve_stdio(config: &ServerConfig) -> io::Result<()> {
    let stdin = io::stdin();
    serve_stream(stdin.lock(), io::stdout().lock(), config)
}
