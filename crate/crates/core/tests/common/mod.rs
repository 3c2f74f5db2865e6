#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

pub type Handler = dyn Fn(&str, &str) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server for exercising the JSON clients. Each request is
/// answered by `handler(path, body)` and recorded.
pub struct MockServer {
    pub address: String,
    requests: Arc<Mutex<Vec<(String, String)>>>,
}

impl MockServer {
    pub fn start<F>(handler: F) -> Self
    where
        F: Fn(&str, &str) -> (u16, String) + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let address = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&requests);
        let handler: Arc<Handler> = Arc::new(handler);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let log = Arc::clone(&log);
                let handler = Arc::clone(&handler);
                thread::spawn(move || {
                    let mut reader = BufReader::new(stream.try_clone().unwrap());
                    let mut request_line = String::new();
                    if reader.read_line(&mut request_line).is_err() {
                        return;
                    }
                    let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
                    let mut length = 0usize;
                    loop {
                        let mut line = String::new();
                        if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                            break;
                        }
                        if let Some((k, v)) = line.split_once(':') {
                            if k.eq_ignore_ascii_case("content-length") {
                                length = v.trim().parse().unwrap_or(0);
                            }
                        }
                    }
                    let mut body = vec![0u8; length];
                    reader.read_exact(&mut body).unwrap();
                    let body = String::from_utf8(body).unwrap();
                    let (status, reply) = handler(&path, &body);
                    log.lock().unwrap().push((path, body));
                    let response = format!(
                        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                        reply.len()
                    );
                    let _ = stream.write_all(response.as_bytes());
                });
            }
        });
        MockServer { address, requests }
    }

    pub fn requests(&self) -> Vec<(String, String)> {
        self.requests.lock().unwrap().clone()
    }
}

/// Pearson r from exact integer arithmetic. Inputs must be multiples of
/// 1/1024 small enough that all sums fit in i128; the only rounding is the
/// final conversion, square root and division.
pub fn exact_pearson_r(xs: &[f64], ys: &[f64]) -> f64 {
    let to_int = |v: f64| {
        let k = v * 1024.0;
        assert_eq!(k.fract(), 0.0, "{v} is not on the 1/1024 grid");
        k as i128
    };
    let a: Vec<i128> = xs.iter().copied().map(to_int).collect();
    let b: Vec<i128> = ys.iter().copied().map(to_int).collect();
    let n = a.len() as i128;
    let (sa, sb) = (a.iter().sum::<i128>(), b.iter().sum::<i128>());
    let saa: i128 = a.iter().map(|v| v * v).sum();
    let sbb: i128 = b.iter().map(|v| v * v).sum();
    let sab: i128 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let cov = n * sab - sa * sb;
    let va = n * saa - sa * sa;
    let vb = n * sbb - sb * sb;
    cov as f64 / ((va as f64) * (vb as f64)).sqrt()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Two-tailed Student-t p-value for correlation `r` over `n` pairs, by
/// quadrature. Substituting `s = sqrt(df) tan(theta)` turns the t density
/// into `cos(theta)^(df-1)`, so
/// `p = int_{theta_t}^{pi/2} cos^(df-1) / int_0^{pi/2} cos^(df-1)` with
/// `tan(theta_t) = |r| / sqrt(1 - r^2)`.
pub fn quadrature_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let theta = (r.abs() / (1.0 - r * r).sqrt()).atan();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let density = move |t: f64| t.cos().max(0.0).powf(df - 1.0);
    let total = integrate(&density, 0.0, half_pi, 1e-14);
    let tail = integrate(&density, theta, half_pi, 1e-14);
    tail / total
}

/// Scorer backed by an exact-text lookup table; unknown text is an error.
pub struct TableScorer {
    pub id: String,
    pub table: std::collections::HashMap<String, f64>,
}

impl TableScorer {
    pub fn new<I, S>(id: &str, entries: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        TableScorer {
            id: id.to_string(),
            table: entries.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

impl sentimt_core::SentimentScorer for TableScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn distribution(&self, text: &str) -> sentimt_core::Result<sentimt_core::ClassDistribution> {
        match self.table.get(text) {
            Some(&p) => sentimt_core::ClassDistribution::binary(p),
            None => Err(sentimt_core::Error::MissingScore(text.to_string())),
        }
    }
}
