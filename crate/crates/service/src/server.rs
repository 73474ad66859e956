use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tower_http::services::ServeDir;

use crate::api;
use crate::error::ServiceError;
use crate::store::Store;

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub host: IpAddr,
    /// 0 picks a free port; see [`Server::local_addr`].
    pub port: u16,
    pub data_dir: PathBuf,
    pub worker_limit: Option<usize>,
    /// Built composer assets, served at `/` when set.
    pub static_dir: Option<PathBuf>,
}

impl ServeConfig {
    pub fn new(port: u16, data_dir: impl Into<PathBuf>) -> Self {
        Self {
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port,
            data_dir: data_dir.into(),
            worker_limit: None,
            static_dir: None,
        }
    }
}

/// A running service. Dropping it without [`shutdown`](Self::shutdown)
/// leaves the listener running until the runtime stops.
pub struct Server {
    addr: SocketAddr,
    store: Arc<Store>,
    stop: oneshot::Sender<()>,
    task: JoinHandle<std::io::Result<()>>,
}

impl Server {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    /// Stops accepting, drains in-flight requests and flushes the registry.
    pub async fn shutdown(self) -> Result<(), ServiceError> {
        let _ = self.stop.send(());
        match self.task.await {
            Ok(result) => result?,
            Err(e) => return Err(ServiceError::Storage(format!("server task failed: {e}"))),
        }
        self.store.flush()
    }
}

/// Opens the data directory, binds the port and starts serving.
pub async fn serve(config: ServeConfig) -> Result<Server, ServiceError> {
    let store = Arc::new(Store::open(&config.data_dir, config.worker_limit)?);
    let listener = TcpListener::bind((config.host, config.port))
        .await
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::AddrInUse => ServiceError::PortInUse(config.port),
            _ => ServiceError::Io(e),
        })?;
    let addr = listener.local_addr()?;

    let mut app = api::router(store.clone());
    if let Some(dir) = &config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }

    let (stop, stopped) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stopped.await;
            })
            .await
    });
    tracing::info!(%addr, data_dir = %config.data_dir.display(), "serving");
    Ok(Server {
        addr,
        store,
        stop,
        task,
    })
}
