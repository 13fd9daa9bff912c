//! Party endpoints over two interchangeable transports: in-process channels
//! (deterministic default) and TCP loopback. Both deliver frames exactly once
//! and in order per (sender, receiver) pair; every delivery appends to the
//! shared audit trace.

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SmobError};
use crate::privacy::{classify_payload, DataCategory, PartyRole, PayloadKind, TraceEntry};
use crate::transport::wire::{decode_frame, encode_frame, MsgType, TaggedMessage, HEADER_LEN};

const RECV_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartyId {
    pub role: PartyRole,
    pub index: u8,
}

impl PartyId {
    pub fn new(role: PartyRole, index: u8) -> Self {
        PartyId { role, index }
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.role.name(), self.index)
    }
}

trait FrameSink: Send {
    fn send_frame(&mut self, frame: &[u8]) -> Result<()>;
}

struct ChannelSink {
    from: PartyId,
    tx: Sender<(PartyId, Vec<u8>)>,
}

impl FrameSink for ChannelSink {
    fn send_frame(&mut self, frame: &[u8]) -> Result<()> {
        self.tx
            .send((self.from, frame.to_vec()))
            .map_err(|_| SmobError::Transport("receiver endpoint dropped".into()))
    }
}

struct TcpSink {
    from: PartyId,
    addr: SocketAddr,
    stream: Option<TcpStream>,
}

impl FrameSink for TcpSink {
    fn send_frame(&mut self, frame: &[u8]) -> Result<()> {
        if self.stream.is_none() {
            let mut s = TcpStream::connect(self.addr)
                .map_err(|e| SmobError::Transport(format!("connect {}: {e}", self.addr)))?;
            s.set_nodelay(true).ok();
            // Preamble identifies the sender for the whole connection.
            s.write_all(&[self.from.role as u8, self.from.index])?;
            self.stream = Some(s);
        }
        self.stream
            .as_mut()
            .unwrap()
            .write_all(frame)
            .map_err(|e| SmobError::Transport(format!("send: {e}")))
    }
}

/// One party's connection to the network: outgoing sinks per peer and a
/// single ordered inbox. Single-owner; move it into the party's thread.
pub struct Endpoint {
    pub id: PartyId,
    sinks: HashMap<PartyId, Box<dyn FrameSink>>,
    inbox: Receiver<(PartyId, Vec<u8>)>,
    /// Frames that arrived while waiting for a different sender.
    pending: HashMap<PartyId, VecDeque<Vec<u8>>>,
    trace: Arc<Mutex<Vec<TraceEntry>>>,
}

impl Endpoint {
    pub fn send(&mut self, to: PartyId, msg: &TaggedMessage) -> Result<()> {
        let frame = encode_frame(msg)?;
        let sink = self
            .sinks
            .get_mut(&to)
            .ok_or_else(|| SmobError::Transport(format!("no route to {}", to.label())))?;
        sink.send_frame(&frame)
    }

    /// Next message from the given sender; frames from other senders are
    /// buffered in arrival order.
    pub fn recv_from(&mut self, from: PartyId) -> Result<TaggedMessage> {
        let frame = loop {
            if let Some(f) = self.pending.get_mut(&from).and_then(|q| q.pop_front()) {
                break f;
            }
            let (sender, frame) = self.inbox.recv_timeout(RECV_TIMEOUT).map_err(|_| {
                SmobError::Transport(format!(
                    "{} timed out waiting for {}",
                    self.id.label(),
                    from.label()
                ))
            })?;
            if sender == from {
                break frame;
            }
            self.pending.entry(sender).or_default().push_back(frame);
        };
        self.deliver(from, &frame)
    }

    /// Deliver a raw frame as if it had arrived from `from`; fault-injection
    /// hook for audit tests.
    pub fn inject_frame(&mut self, from: PartyId, frame: &[u8]) -> Result<TaggedMessage> {
        self.deliver(from, frame)
    }

    fn deliver(&mut self, from: PartyId, frame: &[u8]) -> Result<TaggedMessage> {
        let msg = match decode_frame(frame) {
            Ok(m) => m,
            Err(e) => {
                // Malformed frames are rejected but still audited, fail-closed.
                self.record(from, [0u8; 16], 0xff, PayloadKind::Unknown, frame);
                return Err(e);
            }
        };
        let kind = payload_kind(msg.msg_type, from.role);
        self.record(from, msg.txid, msg.msg_type.to_byte(), kind, &msg.payload);
        Ok(msg)
    }

    fn record(&self, from: PartyId, txid: [u8; 16], msg_type: u8, kind: PayloadKind, payload: &[u8]) {
        let c = classify_payload(kind);
        let digest = hex::encode(Sha256::digest(payload));
        self.trace.lock().unwrap().push(TraceEntry {
            txid,
            sender: from.role,
            sender_index: from.index,
            receiver: self.id.role,
            receiver_index: self.id.index,
            msg_type,
            category: c.category,
            provenance: c.provenance,
            // The eval key legitimately travels to the relinearizing party;
            // only the customer's public key is linkage-sensitive.
            customer_key_material: kind == PayloadKind::CustomerPublicKey,
            payload_len: payload.len(),
            digest,
        });
    }
}

/// Auditor's view of a message, derived from type and sender role.
pub fn payload_kind(msg_type: MsgType, sender: PartyRole) -> PayloadKind {
    match (msg_type, sender) {
        (MsgType::KeyOffer, PartyRole::Customer) => PayloadKind::CustomerPublicKey,
        (MsgType::KeyOffer, _) => PayloadKind::PlatformPublicKey,
        (MsgType::EvalKey, PartyRole::Customer) => PayloadKind::CustomerEvalKey,
        (MsgType::EvalKey, _) => PayloadKind::PlatformEvalKey,
        (MsgType::CtPrice | MsgType::CtPartial | MsgType::CtResult, _) => PayloadKind::Ciphertext {
            content: DataCategory::Sensitive,
        },
        (MsgType::PlainResult, _) => PayloadKind::DecryptedAggregate,
        (MsgType::Control, _) => PayloadKind::Control,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    Inproc,
    Tcp,
}

impl TransportKind {
    pub fn name(self) -> &'static str {
        match self {
            TransportKind::Inproc => "inproc",
            TransportKind::Tcp => "tcp",
        }
    }
}

/// A fully connected set of endpoints plus the shared trace. TCP networks
/// own their listener threads; call `shutdown` (or drop) after the run.
pub struct Network {
    pub endpoints: HashMap<PartyId, Endpoint>,
    pub trace: Arc<Mutex<Vec<TraceEntry>>>,
    tcp_threads: Vec<JoinHandle<()>>,
    tcp_addrs: Vec<SocketAddr>,
}

impl Network {
    pub fn connect(ids: &[PartyId], kind: TransportKind) -> Result<Network> {
        match kind {
            TransportKind::Inproc => Ok(Self::connect_inproc(ids)),
            TransportKind::Tcp => Self::connect_tcp(ids),
        }
    }

    pub fn take(&mut self, id: PartyId) -> Endpoint {
        self.endpoints.remove(&id).expect("endpoint present")
    }

    fn connect_inproc(ids: &[PartyId]) -> Network {
        let trace = Arc::new(Mutex::new(Vec::new()));
        let mut txs: HashMap<PartyId, Sender<(PartyId, Vec<u8>)>> = HashMap::new();
        let mut rxs: HashMap<PartyId, Receiver<(PartyId, Vec<u8>)>> = HashMap::new();
        for &id in ids {
            let (tx, rx) = channel();
            txs.insert(id, tx);
            rxs.insert(id, rx);
        }
        let endpoints = ids
            .iter()
            .map(|&id| {
                let sinks: HashMap<PartyId, Box<dyn FrameSink>> = ids
                    .iter()
                    .filter(|&&peer| peer != id)
                    .map(|&peer| {
                        let sink: Box<dyn FrameSink> = Box::new(ChannelSink {
                            from: id,
                            tx: txs[&peer].clone(),
                        });
                        (peer, sink)
                    })
                    .collect();
                (
                    id,
                    Endpoint {
                        id,
                        sinks,
                        inbox: rxs.remove(&id).unwrap(),
                        pending: HashMap::new(),
                        trace: Arc::clone(&trace),
                    },
                )
            })
            .collect();
        Network {
            endpoints,
            trace,
            tcp_threads: Vec::new(),
            tcp_addrs: Vec::new(),
        }
    }

    fn connect_tcp(ids: &[PartyId]) -> Result<Network> {
        let trace = Arc::new(Mutex::new(Vec::new()));
        let mut addrs: HashMap<PartyId, SocketAddr> = HashMap::new();
        let mut rxs: HashMap<PartyId, Receiver<(PartyId, Vec<u8>)>> = HashMap::new();
        let mut threads = Vec::new();
        for &id in ids {
            let listener = TcpListener::bind("127.0.0.1:0")?;
            addrs.insert(id, listener.local_addr()?);
            let (tx, rx) = channel();
            rxs.insert(id, rx);
            threads.push(std::thread::spawn(move || accept_loop(listener, tx)));
        }
        let endpoints = ids
            .iter()
            .map(|&id| {
                let sinks: HashMap<PartyId, Box<dyn FrameSink>> = ids
                    .iter()
                    .filter(|&&peer| peer != id)
                    .map(|&peer| {
                        let sink: Box<dyn FrameSink> = Box::new(TcpSink {
                            from: id,
                            addr: addrs[&peer],
                            stream: None,
                        });
                        (peer, sink)
                    })
                    .collect();
                (
                    id,
                    Endpoint {
                        id,
                        sinks,
                        inbox: rxs.remove(&id).unwrap(),
                        pending: HashMap::new(),
                        trace: Arc::clone(&trace),
                    },
                )
            })
            .collect();
        Ok(Network {
            endpoints,
            trace,
            tcp_threads: threads,
            tcp_addrs: addrs.into_values().collect(),
        })
    }

    /// Stop TCP listener threads. Reader threads exit on peer disconnect.
    pub fn shutdown(&mut self) {
        for addr in self.tcp_addrs.drain(..) {
            // Sentinel preamble tells the acceptor to stop.
            if let Ok(mut s) = TcpStream::connect(addr) {
                let _ = s.write_all(&[0xff, 0xff]);
            }
        }
        for t in self.tcp_threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for Network {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn accept_loop(listener: TcpListener, tx: Sender<(PartyId, Vec<u8>)>) {
    loop {
        let Ok((mut stream, _)) = listener.accept() else {
            return;
        };
        let mut preamble = [0u8; 2];
        if stream.read_exact(&mut preamble).is_err() {
            continue;
        }
        let Some(role) = PartyRole::from_byte(preamble[0]) else {
            return; // shutdown sentinel
        };
        let from = PartyId::new(role, preamble[1]);
        let tx = tx.clone();
        std::thread::spawn(move || read_loop(stream, from, tx));
    }
}

fn read_loop(mut stream: TcpStream, from: PartyId, tx: Sender<(PartyId, Vec<u8>)>) {
    loop {
        let mut header = vec![0u8; HEADER_LEN];
        if stream.read_exact(&mut header).is_err() {
            return; // peer closed
        }
        let payload_len = u32::from_le_bytes(header[24..28].try_into().unwrap()) as usize;
        if payload_len > crate::transport::wire::MAX_PAYLOAD {
            return;
        }
        let mut frame = header;
        frame.resize(HEADER_LEN + payload_len, 0);
        if stream.read_exact(&mut frame[HEADER_LEN..]).is_err() {
            return;
        }
        if tx.send((from, frame)).is_err() {
            return;
        }
    }
}
