use std::collections::HashMap;

use super::records::ConfusionRecord;

pub const DEFAULT_DEDUP_WINDOW_S: f64 = 120.0;

/// Collapses repeated same-topic confusion records.
///
/// Records are sorted by timestamp (then topic). A record joins the latest
/// group of its topic (compared case-insensitively, whitespace folded) when
/// it comes at most `window` seconds after that group's last member, even if
/// other topics fall in between; a group may therefore span more than
/// `window` when its members are chained closely. Each group keeps its
/// earliest record, carrying the strongest severity seen in the group.
pub fn dedup_confusion(mut records: Vec<ConfusionRecord>, window: f64) -> Vec<ConfusionRecord> {
    let key = |r: &ConfusionRecord| r.topic.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp).then_with(|| key(a).cmp(&key(b))));
    let mut out: Vec<ConfusionRecord> = Vec::with_capacity(records.len());
    // topic -> (index in `out`, timestamp of the group's last member)
    let mut open: HashMap<String, (usize, f64)> = HashMap::new();
    for r in records {
        let k = key(&r);
        if let Some((i, last)) = open.get_mut(&k) {
            if r.timestamp - *last <= window {
                out[*i].severity = out[*i].severity.max(r.severity);
                *last = r.timestamp;
                continue;
            }
        }
        open.insert(k, (out.len(), r.timestamp));
        out.push(r);
    }
    out
}
