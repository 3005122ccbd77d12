"use strict";
/**
 * Ghost suggestion state machine, independent of the editor API.
 *
 * At most one ghost suggestion is visible. Every displayed suggestion sends
 * exactly one cc/received; accepting inserts the server text verbatim,
 * sends exactly one cc/accepted, and immediately requests the next line so
 * Tab can be pressed repeatedly for multi-line completions. Any edit that
 * is not our own acceptance insertion, and any cursor move off the anchor,
 * dismisses the ghost.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.SuggestionController = void 0;
exports.positionAfterInsert = positionAfterInsert;
function samePosition(a, b) {
    return a.line === b.line && a.character === b.character;
}
class SuggestionController {
    lsp;
    host;
    ghost = null;
    ticket = 0;
    selfEdit = false;
    constructor(lsp, host) {
        this.lsp = lsp;
        this.host = host;
    }
    get current() {
        return this.ghost;
    }
    /** Ask the server for a completion; latest invocation wins. */
    async requestCompletion(uri, position) {
        const ticket = ++this.ticket;
        let items;
        try {
            items = await this.lsp.inlineCompletions(uri, position);
        }
        catch {
            return; // server trouble never surfaces in the editor
        }
        if (ticket !== this.ticket) {
            return; // a newer invocation superseded this one
        }
        if (!items.length || !items[0].insertText) {
            this.dismiss();
            return;
        }
        const item = items[0];
        this.lsp.ccReceived(item.requestId, this.host.now());
        this.ghost = {
            requestId: item.requestId,
            insertText: item.insertText,
            anchor: position,
            shownAt: this.host.now(),
        };
        this.host.showGhost(this.ghost);
    }
    /** Tab handler. False means: nothing accepted, let the editor have Tab. */
    async accept(uri) {
        if (!this.ghost || this.host.isNativePopupVisible()) {
            return false;
        }
        const ghost = this.ghost;
        this.ghost = null;
        this.host.clearGhost();
        // the explicit accept signal goes out before the edit it causes
        this.lsp.ccAccepted(ghost.requestId);
        this.selfEdit = true;
        let next;
        try {
            next = await this.host.insertText(ghost.anchor, ghost.insertText);
        }
        finally {
            this.selfEdit = false;
        }
        await this.requestCompletion(uri, next);
        return true;
    }
    /** Escape handler; also used for passive invalidation. */
    dismiss() {
        if (this.ghost) {
            this.ghost = null;
            this.host.clearGhost();
        }
    }
    /** Document edits that are not our own insertion invalidate the ghost. */
    onTextChanged() {
        if (!this.selfEdit) {
            this.dismiss();
        }
    }
    onCursorMoved(position) {
        if (this.ghost && !samePosition(position, this.ghost.anchor)) {
            this.dismiss();
        }
    }
}
exports.SuggestionController = SuggestionController;
/** Cursor position after inserting text at an anchor. */
function positionAfterInsert(anchor, text) {
    const lines = text.split("\n");
    if (lines.length === 1) {
        return { line: anchor.line, character: anchor.character + text.length };
    }
    return {
        line: anchor.line + lines.length - 1,
        character: lines[lines.length - 1].length,
    };
}
//# sourceMappingURL=controller.js.map