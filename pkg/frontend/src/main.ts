import { ServiceClient } from "./api";
import { ChatApp } from "./app";

const serviceUrl = (window as { CONVREC_SERVICE_URL?: string }).CONVREC_SERVICE_URL ?? "";
const root = document.getElementById("app");
if (root) {
  new ChatApp(root, new ServiceClient(serviceUrl));
}
