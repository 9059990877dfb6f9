import { boot } from "./app";
import "./style.css";

boot(document.getElementById("app")!);
