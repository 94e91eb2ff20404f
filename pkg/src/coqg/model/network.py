"""Multi-source encoder/decoder with a unified copy-attention memory.

Architecture summary (single example, no batching -- passages and histories
have wildly different shapes and desk-scale training does not need padding):

* passage encoder: bi-LSTM over [word; answer-position; turn; chunk]
  embeddings, followed by gated self-matching over its own states;
* conversation encoder: token-level bi-LSTM per history turn, then a
  context-level bi-LSTM over per-turn summaries;
* decoder: LSTM cell whose state attends jointly over passage states and all
  history token states.  Raw bilinear scores are exponentiated (stabilized
  softmax over the concatenated score vector), so passage weights alpha and
  conversation weights beta form one distribution:
  beta[k, j] proportional to exp(token_score[k, j]) * exp(turn_score[k]).
* output: a generation softmax mixed with the copy distribution (alpha and
  beta scattered onto extended-vocabulary ids) through a learned gate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import torch
import torch.nn as nn

from .config import ModelConfig
from .indexing import IndexedExample

NUM_BIO_TAGS = 3


@dataclass
class StepAttention:
    """Jointly normalized attention of one decoding step.

    ``alpha``: (num_passage_tokens,) weights over passage states.
    ``beta``: (total_history_tokens,) weights over flattened history tokens.
    ``p_gen``: scalar copy gate, None until the output layer ran.
    """

    alpha: torch.Tensor
    beta: torch.Tensor
    p_gen: torch.Tensor | None = None

    def detached(self) -> "StepAttention":
        return StepAttention(
            self.alpha.detach().clone(),
            self.beta.detach().clone(),
            self.p_gen.detach().clone() if self.p_gen is not None else None,
        )


@dataclass
class EncoderOutputs:
    passage_states: torch.Tensor  # (m, hidden) post self-gating
    conv_token_states: list[torch.Tensor]  # per turn (len_k, hidden)
    conv_context_states: torch.Tensor  # (num_turns, hidden)
    conv_flat: torch.Tensor  # (total_history_tokens, hidden)
    passage_final: tuple[torch.Tensor, torch.Tensor]  # concatenated fw/bw (h, c)


class QuestionGenerator(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        torch.manual_seed(config.seed)
        self.config = config
        half = config.hidden_dim // 2
        h = config.hidden_dim

        self.word_emb = nn.Embedding(config.vocab_size, config.word_dim)
        self.answer_pos_emb = nn.Embedding(NUM_BIO_TAGS, config.answer_pos_dim)
        self.turn_emb = nn.Embedding(config.max_turn + 1, config.turn_dim)
        self.chunk_emb = nn.Embedding(config.num_chunks, config.chunk_dim)

        passage_in = config.word_dim + config.answer_pos_dim + config.turn_dim + config.chunk_dim
        self.passage_lstm = nn.LSTM(passage_in, half, bidirectional=True, batch_first=True)
        self.conv_token_lstm = nn.LSTM(config.word_dim, half, bidirectional=True, batch_first=True)
        self.conv_context_lstm = nn.LSTM(h, half, bidirectional=True, batch_first=True)

        # gated self-matching over passage states
        self.self_match = nn.Linear(h, h, bias=False)
        self.fuse_proj = nn.Linear(2 * h, h)
        self.gate_proj = nn.Linear(2 * h, h)

        # bilinear attention maps (score = memory_state . W state)
        self.passage_score = nn.Linear(h, h, bias=False)
        self.turn_token_score = nn.Linear(h, h, bias=False)
        self.turn_context_score = nn.Linear(h, h, bias=False)

        self.decoder_cell = nn.LSTMCell(config.word_dim, h)
        self.init_h_proj = nn.Linear(h, h)
        self.init_c_proj = nn.Linear(h, h)

        self.readout = nn.Linear(2 * h, h, bias=False)
        self.vocab_proj = nn.Linear(h, config.vocab_size)
        self.copy_gate = nn.Linear(2 * h + config.word_dim, 1)

        self.dropout = nn.Dropout(config.dropout)

    # ------------------------------------------------------------------
    # encoding
    # ------------------------------------------------------------------

    def embed_passage(self, example: IndexedExample) -> torch.Tensor:
        """Per-token input vectors [word; answer-position; turn; chunk].

        The turn embedding of the (clamped) current turn number is broadcast
        to every passage token.
        """
        device = self.word_emb.weight.device
        words = torch.tensor(example.passage_ids, dtype=torch.long, device=device)
        bio = torch.tensor(example.bio_ids, dtype=torch.long, device=device)
        chunks = torch.tensor(example.chunk_ids, dtype=torch.long, device=device)
        turn = min(max(example.turn_number, 0), self.config.max_turn)
        turn_idx = torch.tensor([turn], dtype=torch.long, device=device)
        m = len(example.passage_ids)
        parts = [
            self.word_emb(words),
            self.answer_pos_emb(bio),
            self.turn_emb(turn_idx).expand(m, -1),
            self.chunk_emb(chunks),
        ]
        return self.dropout(torch.cat(parts, dim=-1))

    def gated_self_match(
        self, states: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Self-matching over passage states with a gated merge.

        Returns (gated states, attention matrix, matched vectors); attention
        row j is the distribution position j puts over all positions.
        """
        proj = self.self_match(states)  # row j = W_s h_j
        scores = proj @ states.T  # scores[j, i] = h_i . W_s h_j
        attn = torch.softmax(scores, dim=1)
        matched = attn @ states  # row j = sum_i attn[j, i] h_i
        both = torch.cat([states, matched], dim=-1)
        fused = torch.tanh(self.fuse_proj(both))
        gate = torch.sigmoid(self.gate_proj(both))
        gated = gate * fused + (1.0 - gate) * states
        return gated, attn, matched

    def encode_passage(self, inputs: torch.Tensor) -> tuple[torch.Tensor, tuple[torch.Tensor, torch.Tensor]]:
        """Bi-LSTM then gated self-matching; returns (gated states, final (h, c))."""
        if inputs.shape[0] == 0:
            raise ValueError("passage must be non-empty")
        out, (h_n, c_n) = self.passage_lstm(inputs.unsqueeze(0))
        states = self.dropout(out.squeeze(0))  # (m, hidden)
        final_h = torch.cat([h_n[0, 0], h_n[1, 0]], dim=-1)
        final_c = torch.cat([c_n[0, 0], c_n[1, 0]], dim=-1)
        gated, _, _ = self.gated_self_match(states)
        return gated, (final_h, final_c)

    def encode_conversation(
        self, history_ids: list[list[int]]
    ) -> tuple[list[torch.Tensor], torch.Tensor]:
        """Token-level states per turn plus context-level per-turn states."""
        device = self.word_emb.weight.device
        h = self.config.hidden_dim
        if not history_ids:
            empty = torch.zeros(0, h, device=device, dtype=self.word_emb.weight.dtype)
            return [], empty
        token_states = []
        summaries = []
        for turn in history_ids:
            ids = torch.tensor(turn, dtype=torch.long, device=device)
            emb = self.dropout(self.word_emb(ids)).unsqueeze(0)
            out, (h_n, _) = self.conv_token_lstm(emb)
            token_states.append(self.dropout(out.squeeze(0)))
            summaries.append(torch.cat([h_n[0, 0], h_n[1, 0]], dim=-1))
        stacked = torch.stack(summaries).unsqueeze(0)  # (1, K, hidden)
        ctx, _ = self.conv_context_lstm(stacked)
        return token_states, self.dropout(ctx.squeeze(0))

    def encode(self, example: IndexedExample) -> EncoderOutputs:
        gated, final = self.encode_passage(self.embed_passage(example))
        token_states, context_states = self.encode_conversation(example.history_ids)
        if token_states:
            conv_flat = torch.cat(token_states, dim=0)
        else:
            conv_flat = torch.zeros(
                0, self.config.hidden_dim, device=gated.device, dtype=gated.dtype
            )
        return EncoderOutputs(gated, token_states, context_states, conv_flat, final)

    def init_decoder(self, enc: EncoderOutputs) -> tuple[torch.Tensor, torch.Tensor]:
        h0 = torch.tanh(self.init_h_proj(enc.passage_final[0]))
        c0 = torch.tanh(self.init_c_proj(enc.passage_final[1]))
        return h0, c0

    # ------------------------------------------------------------------
    # decoding
    # ------------------------------------------------------------------

    def attention_step(
        self, decoder_state: torch.Tensor, enc: EncoderOutputs
    ) -> tuple[StepAttention, torch.Tensor]:
        """Jointly normalized attention over passage + history token states.

        Raw bilinear scores are combined in log space (token score + turn
        score for history positions) and pushed through one softmax, which
        subtracts the max score before exponentiation.
        """
        scores_p = enc.passage_states @ self.passage_score(decoder_state)
        pieces = [scores_p]
        for k, token_states in enumerate(enc.conv_token_states):
            token_scores = token_states @ self.turn_token_score(decoder_state)
            turn_score = enc.conv_context_states[k] @ self.turn_context_score(decoder_state)
            pieces.append(token_scores + turn_score)
        weights = torch.softmax(torch.cat(pieces), dim=0)
        m = scores_p.shape[0]
        alpha = weights[:m]
        beta = weights[m:]
        context = alpha @ enc.passage_states
        if beta.shape[0] > 0:
            context = context + beta @ enc.conv_flat
        return StepAttention(alpha=alpha, beta=beta), context

    def decode_step(
        self,
        prev_token_id: int,
        state: tuple[torch.Tensor, torch.Tensor],
        enc: EncoderOutputs,
        source_ext_ids: torch.Tensor,
        extended_size: int,
    ) -> tuple[tuple[torch.Tensor, torch.Tensor], StepAttention, torch.Tensor]:
        """One recurrent update; returns the final extended-vocab distribution.

        ``source_ext_ids`` holds the extended ids of passage tokens followed
        by flattened history tokens, aligned with (alpha, beta).
        """
        device = self.word_emb.weight.device
        w = self.dropout(self.word_emb(torch.tensor(prev_token_id, dtype=torch.long, device=device)))
        h, c = self.decoder_cell(w.unsqueeze(0), (state[0].unsqueeze(0), state[1].unsqueeze(0)))
        h, c = h.squeeze(0), c.squeeze(0)
        h_out = self.dropout(h)

        att, context = self.attention_step(h_out, enc)
        readout = torch.tanh(self.readout(torch.cat([h_out, context])))
        gen_dist = torch.softmax(self.vocab_proj(readout), dim=0)
        p_gen = torch.sigmoid(self.copy_gate(torch.cat([context, h_out, w]))).squeeze(0)
        att = replace(att, p_gen=p_gen)

        vocab_size = self.config.vocab_size
        padded_gen = p_gen * gen_dist
        if extended_size > vocab_size:
            zeros = torch.zeros(extended_size - vocab_size, device=device, dtype=gen_dist.dtype)
            padded_gen = torch.cat([padded_gen, zeros])
        copy_weights = torch.cat([att.alpha, att.beta])
        copy_dist = torch.zeros(extended_size, device=device, dtype=gen_dist.dtype).index_add(
            0, source_ext_ids, (1.0 - p_gen) * copy_weights
        )
        final = padded_gen + copy_dist
        return (h, c), att, final

    def source_ext_ids(self, example: IndexedExample) -> torch.Tensor:
        device = self.word_emb.weight.device
        return torch.tensor(
            example.passage_ext_ids + example.history_ext_ids, dtype=torch.long, device=device
        )

    def extended_size(self, example: IndexedExample) -> int:
        return self.config.vocab_size + len(example.oov_tokens)

    def forward(
        self, example: IndexedExample
    ) -> tuple[torch.Tensor, list[StepAttention]]:
        """Teacher-forced pass; one distribution/attention record per target
        position (the indexed target carries the stop symbol as its last
        position)."""
        enc = self.encode(example)
        state = self.init_decoder(enc)
        src_ids = self.source_ext_ids(example)
        ext_size = self.extended_size(example)
        dists = []
        atts = []
        for prev_id in example.target_in_ids:
            state, att, final = self.decode_step(prev_id, state, enc, src_ids, ext_size)
            dists.append(final)
            atts.append(att)
        return torch.stack(dists), atts
