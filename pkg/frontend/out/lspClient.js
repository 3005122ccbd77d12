"use strict";
/** Typed wrapper over the ghostwriter language server protocol surface. */
Object.defineProperty(exports, "__esModule", { value: true });
exports.GwLspClient = void 0;
class GwLspClient {
    rpc;
    constructor(rpc) {
        this.rpc = rpc;
    }
    async initialize() {
        const result = await this.rpc.request("initialize", {});
        this.rpc.notify("initialized", {});
        return result;
    }
    didOpen(uri, languageId, version, text) {
        this.rpc.notify("textDocument/didOpen", {
            textDocument: { uri, languageId, version, text },
        });
    }
    didChange(uri, version, changes) {
        this.rpc.notify("textDocument/didChange", {
            textDocument: { uri, version },
            contentChanges: changes,
        });
    }
    async inlineCompletions(uri, position) {
        const result = await this.rpc.request("textDocument/inlineCompletions", {
            textDocument: { uri },
            position,
        });
        return result?.items ?? [];
    }
    ccReceived(requestId, clientTimestampMs) {
        this.rpc.notify("cc/received", { requestId, clientTimestampMs });
    }
    ccAccepted(requestId) {
        this.rpc.notify("cc/accepted", { requestId });
    }
    async shutdown() {
        await this.rpc.request("shutdown", null);
        this.rpc.notify("exit", null);
    }
}
exports.GwLspClient = GwLspClient;
//# sourceMappingURL=lspClient.js.map